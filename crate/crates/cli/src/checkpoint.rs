//! Binary checkpoints.
//!
//! Little-endian layout: magic `TCM1`; `u32` version; `u32` n1, n2, n3;
//! `f64` l1, l2, l3; `f64` alpha, beta, time; then the seven physical-space
//! arrays u1 u2 u3 v1 v2 v3 θ, each `n1 n2 n3` values with `x1` fastest.

use std::path::Path;

use tcm_core::model::State;
use tcm_core::{Field, Grid, VectorField};

use crate::error::CliError;

pub const MAGIC: &[u8; 4] = b"TCM1";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub alpha: f64,
    pub beta: f64,
    pub state: State,
}

pub fn encode(state: &State, alpha: f64, beta: f64) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(64 + 7 * 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in g.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for x in g.lengths().into_iter().chain([alpha, beta, state.time]) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let fields = state.u.components().iter().chain(state.v.components()).chain([&state.theta]);
    for f in fields {
        for x in f.physical_data().iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CliError> {
        if self.bytes.len() < N {
            return Err(CliError::Other("checkpoint is truncated".into()));
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        Ok(head.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, CliError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CliError> {
    let mut r = Reader { bytes };
    if &r.take::<4>()? != MAGIC {
        return Err(CliError::Other("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CliError::Other(format!("unsupported checkpoint version {version}")));
    }
    let n = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let l = [r.f64()?, r.f64()?, r.f64()?];
    let (alpha, beta, time) = (r.f64()?, r.f64()?, r.f64()?);
    let grid = Grid::new(n, l)?;
    if r.bytes.len() != 7 * 8 * grid.len() {
        return Err(CliError::Other(format!(
            "checkpoint payload has {} bytes, expected {}",
            r.bytes.len(),
            7 * 8 * grid.len()
        )));
    }
    let mut read_field = || -> Result<Field, CliError> {
        let values = (0..grid.len()).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        Ok(Field::from_physical(&grid, values)?)
    };
    let mut vector = || -> Result<VectorField, CliError> {
        Ok(VectorField::new([read_field()?, read_field()?, read_field()?])?)
    };
    let u = vector()?;
    let v = vector()?;
    let theta = read_field()?;
    Ok(Checkpoint { alpha, beta, state: State::new(u, v, theta, time)? })
}

pub fn save(path: &Path, state: &State, alpha: f64, beta: f64) -> Result<(), CliError> {
    std::fs::write(path, encode(state, alpha, beta)).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<Checkpoint, CliError> {
    decode(&std::fs::read(path).map_err(|e| CliError::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tcm_core::model::{initial_condition, InitialCondition};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new([8, 4, 6], [1.0, 2.0, 3.5]).unwrap();
        let s = initial_condition(&g, InitialCondition::RandomBand { max_mode: 1 }, 0.7, 5).unwrap().into_physical();
        let bytes = encode(&s, 1.5, 4.0);
        assert_eq!(&bytes[..4], b"TCM1");
        assert_eq!(bytes.len(), 4 + 4 + 12 + 48 + 7 * 8 * g.len());
        let c = decode(&bytes).unwrap();
        assert_eq!((c.alpha, c.beta), (1.5, 4.0));
        assert_eq!(c.state, s);
        assert_eq!(encode(&c.state, 1.5, 4.0), bytes);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::cube(4).unwrap();
        let bytes = encode(&State::zeros(&g), 1.5, 4.0);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut ver = bytes;
        ver[4] = 9;
        assert!(decode(&ver).is_err());
    }
}
