//! SNNC checkpoint files.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "SNNC" | u32 version | u32 group_count
//! per group:
//!   u32 name_len | name (utf-8) | u32 ndim | u32 dims[ndim]
//!   f64 theta[n] | f64 v[n] | f64 m[n] | f64 s[n]
//!   u64 t | f64 lambda | u8 regularized
//! ```
//!
//! `lambda` is stored as the effective threshold; `lambda = 0` reads back as
//! a group without an ℓ1 term.

use std::path::Path;

use crate::binio::{too_large, Reader, Writer};
use crate::bregman::{sparsity_report, ProxSpec, SparsityReport};
use crate::error::{FormatError, Result};
use crate::numerics::Tensor;

use super::ParamState;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"SNNC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedState {
    pub name: String,
    pub state: ParamState,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Checkpoint {
    pub groups: Vec<NamedState>,
}

impl Checkpoint {
    pub fn sparsity(&self) -> SparsityReport {
        sparsity_report(
            self.groups
                .iter()
                .map(|g| (g.name.as_str(), &g.state.theta)),
        )
    }

    pub fn get(&self, name: &str) -> Option<&ParamState> {
        self.groups
            .iter()
            .find(|g| g.name == name)
            .map(|g| &g.state)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(&CHECKPOINT_MAGIC);
        w.u32(CHECKPOINT_VERSION);
        w.u32(self.groups.len() as u32);
        for g in &self.groups {
            let st = &g.state;
            w.u32(g.name.len() as u32);
            w.bytes(g.name.as_bytes());
            w.u32(st.theta.shape().len() as u32);
            for &d in st.theta.shape() {
                w.u32(d as u32);
            }
            for t in [&st.theta, &st.v, &st.m, &st.s] {
                w.f64s(t.data());
            }
            w.u64(st.t);
            w.f64(st.prox.effective_lambda());
            w.u8(st.regularized as u8);
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.magic(CHECKPOINT_MAGIC)?;
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(FormatError::Version {
                expected: CHECKPOINT_VERSION,
                found: version,
            });
        }
        let count = r.u32()? as usize;
        let mut groups = Vec::new();
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|_| FormatError::Malformed("group name is not utf-8".into()))?;
            let ndim = r.u32()? as usize;
            let mut shape = Vec::new();
            for _ in 0..ndim {
                shape.push(r.u32()? as usize);
            }
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(too_large)?;
            let mut tensors = Vec::with_capacity(4);
            for _ in 0..4 {
                tensors.push(
                    Tensor::new(shape.clone(), r.f64s(n)?)
                        .map_err(|e| FormatError::Malformed(e.to_string()))?,
                );
            }
            let t = r.u64()?;
            let lambda = r.f64()?;
            let regularized = match r.u8()? {
                0 => false,
                1 => true,
                b => return Err(FormatError::Malformed(format!("flag byte {b}"))),
            };
            let prox = if lambda == 0.0 {
                ProxSpec::none()
            } else {
                ProxSpec::l1(lambda)
                    .map_err(|_| FormatError::Malformed(format!("lambda {lambda}")))?
            };
            let s = tensors.pop().unwrap();
            let m = tensors.pop().unwrap();
            let v = tensors.pop().unwrap();
            let theta = tensors.pop().unwrap();
            groups.push(NamedState {
                name,
                state: ParamState {
                    theta,
                    v,
                    m,
                    s,
                    t,
                    prox,
                    regularized,
                },
            });
        }
        r.finish()?;
        Ok(Self { groups })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(Self::from_bytes(&bytes)?)
    }
}
