//! The one-cycle learning-rate schedule next to a constant one.

use breg_snn::optim::LrSchedule;
use breg_snn::Result;

pub fn run_example() -> Result<()> {
    let total = 100;
    let sched = LrSchedule::one_cycle(5e-3, total);
    sched.validate()?;
    println!(
        "start {:.2e}  peak {:.2e} at step {}  end {:.2e}",
        sched.initial_lr(),
        sched.max_lr,
        sched.peak_step(),
        sched.final_lr()
    );
    for step in (0..=total).step_by(10) {
        let lr = sched.lr_at(step);
        let bar = "#".repeat((lr / sched.max_lr * 50.0).round() as usize);
        println!("{step:>4} {lr:.2e} {bar}");
    }
    println!("constant: {:.2e}", LrSchedule::constant(5e-3).lr_at(37));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
