//! Generates both synthetic tasks, writes them as SPK1 files and reads them back.

use breg_snn::data::{
    gen_glyphs, gen_pattern_task, gen_sequential_pixels, GlyphTask, PatternTask, SpikeDataset,
};
use breg_snn::{Result, Rng};

pub fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join("breg-snn-example-data");
    std::fs::create_dir_all(&dir)?;

    let pattern = gen_pattern_task(&mut Rng::new(0), &PatternTask::default())?;
    println!("{}", pattern.summary());
    println!("class counts {:?}", pattern.class_counts());
    let binned = pattern.bin_channels(4)?;
    println!("binned ×4: {}", binned.summary());

    let glyphs = GlyphTask {
        permutation_seed: Some(7),
        ..GlyphTask::default()
    };
    let (images, labels) = gen_glyphs(&mut Rng::new(1), &glyphs)?;
    let pixels = gen_sequential_pixels(&images, &labels, glyphs.classes, glyphs.permutation_seed)?;
    println!("{}", pixels.summary());

    for (ds, file) in [(&pattern, "pattern.spk1"), (&pixels, "psglyph.spk1")] {
        let path = dir.join(file);
        ds.save(&path)?;
        let back = SpikeDataset::load(&path)?;
        assert_eq!(back.samples(), ds.samples());
        println!(
            "{} round-tripped ({} bytes)",
            path.display(),
            std::fs::metadata(&path)?.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
