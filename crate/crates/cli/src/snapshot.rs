//! Binary snapshot format.
//!
//! ```text
//! magic      4 bytes  "IIE1"
//! version    u8       1
//! n          u32
//! time       f64
//! norm tag   string   Fourier normalization convention
//! vort tag   string   which vorticity the "omega" field holds
//! count      u32
//! names      count × string
//! payload    count × n² × f64, row-major (index = iy·n + ix)
//! ```
//!
//! Integers and floats are little endian; a string is a `u16` byte length
//! followed by UTF-8. Floats are stored by bit pattern, so a round trip is
//! exact, NaN payloads included.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use iie_core::eulerian::EulerianState;
use iie_core::{DensityField, Grid, ScalarField, VectorField};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"IIE1";
pub const VERSION: u8 = 1;
/// Forward transform divided by `n²`, so coefficients are Fourier-series coefficients.
pub const NORMALIZATION_TAG: &str = "fourier-series";
/// The "omega" field is the curl of the momentum `ρu`.
pub const VORTICITY_TAG: &str = "momentum-curl";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported {what} tag '{tag}'")]
    UnsupportedTag { what: &'static str, tag: String },
    #[error("header string is not valid UTF-8")]
    InvalidUtf8,
    #[error("field '{name}' has {actual} samples, expected {expected}")]
    FieldLength {
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("duplicate field '{0}'")]
    DuplicateField(String),
    #[error("missing field '{0}'")]
    MissingField(String),
    #[error("header string longer than 65535 bytes")]
    NameTooLong,
    #[error(transparent)]
    Core(#[from] iie_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub time: f64,
    /// Named fields of `n²` samples each, in file order.
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Snapshot {
    pub fn new(n: usize, time: f64) -> Self {
        Self {
            n,
            time,
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<(), SnapshotError> {
        let name = name.into();
        if values.len() != self.n * self.n {
            return Err(SnapshotError::FieldLength {
                name,
                expected: self.n * self.n,
                actual: values.len(),
            });
        }
        if self.field(&name).is_some() {
            return Err(SnapshotError::DuplicateField(name));
        }
        self.fields.push((name, values));
        Ok(())
    }

    pub fn with_field(mut self, name: &str, field: &ScalarField) -> Result<Self, SnapshotError> {
        self.push(name, field.values().to_vec())?;
        Ok(self)
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn scalar(&self, name: &str) -> Result<ScalarField, SnapshotError> {
        let values = self
            .field(name)
            .ok_or_else(|| SnapshotError::MissingField(name.to_string()))?;
        Ok(ScalarField::new(Grid::new(self.n)?, values.to_vec())?)
    }

    pub fn vector(&self, x: &str, y: &str) -> Result<VectorField, SnapshotError> {
        Ok(VectorField::new(self.scalar(x)?, self.scalar(y)?)?)
    }

    /// Fields `omega`, `rho` and, when given, `u_x`, `u_y`.
    pub fn from_state(
        state: &EulerianState,
        velocity: Option<&VectorField>,
    ) -> Result<Self, SnapshotError> {
        let mut s = Self::new(state.omega.grid().n(), state.t)
            .with_field("omega", &state.omega)?
            .with_field("rho", state.rho.values())?;
        if let Some(u) = velocity {
            s = s.with_field("u_x", &u.x)?.with_field("u_y", &u.y)?;
        }
        Ok(s)
    }

    pub fn to_state(&self) -> Result<EulerianState, SnapshotError> {
        Ok(EulerianState {
            omega: self.scalar("omega")?,
            rho: DensityField::new(self.scalar("rho")?)?,
            t: self.time,
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), SnapshotError> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        let n = u32::try_from(self.n).map_err(|_| {
            io::Error::new(io::ErrorKind::InvalidInput, "grid too large for the format")
        })?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        write_str(w, NORMALIZATION_TAG)?;
        write_str(w, VORTICITY_TAG)?;
        w.write_all(&(self.fields.len() as u32).to_le_bytes())?;
        for (name, _) in &self.fields {
            write_str(w, name)?;
        }
        for (name, values) in &self.fields {
            if values.len() != self.n * self.n {
                return Err(SnapshotError::FieldLength {
                    name: name.clone(),
                    expected: self.n * self.n,
                    actual: values.len(),
                });
            }
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, SnapshotError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = read_array::<1>(r)?[0];
        if version != VERSION {
            return Err(SnapshotError::UnsupportedVersion(version));
        }
        let n = u32::from_le_bytes(read_array(r)?) as usize;
        let time = f64::from_le_bytes(read_array(r)?);
        for (what, expected) in [
            ("normalization", NORMALIZATION_TAG),
            ("vorticity", VORTICITY_TAG),
        ] {
            let tag = read_str(r)?;
            if tag != expected {
                return Err(SnapshotError::UnsupportedTag { what, tag });
            }
        }
        let count = u32::from_le_bytes(read_array(r)?) as usize;
        let names = (0..count)
            .map(|_| read_str(r))
            .collect::<Result<Vec<_>, _>>()?;
        let mut snapshot = Self::new(n, time);
        let mut buf = vec![0u8; 8 * n * n];
        for name in names {
            r.read_exact(&mut buf)?;
            let values = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            snapshot.push(name, values)?;
        }
        Ok(snapshot)
    }
}

fn write_str(w: &mut impl Write, s: &str) -> Result<(), SnapshotError> {
    let len = u16::try_from(s.len()).map_err(|_| SnapshotError::NameTooLong)?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn read_str(r: &mut impl Read) -> Result<String, SnapshotError> {
    let len = u16::from_le_bytes(read_array(r)?) as usize;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|_| SnapshotError::InvalidUtf8)
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    snapshot.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    Snapshot::read_from(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let mut s = Snapshot::new(8, 0.25);
        s.push("a", (0..64).map(|i| i as f64 * 0.1).collect())
            .unwrap();
        s.push("b", vec![-0.0; 64]).unwrap();
        s
    }

    #[test]
    fn header_layout() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"IIE1");
        assert_eq!(bytes[4], 1);
        assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[9..17].try_into().unwrap()), 0.25);
        let header = 17 + 2 + NORMALIZATION_TAG.len() + 2 + VORTICITY_TAG.len() + 4 + 2 * 3;
        assert_eq!(bytes.len(), header + 2 * 64 * 8);
    }

    #[test]
    fn signed_zero_survives() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let back = Snapshot::read_from(&mut bytes.as_slice()).unwrap();
        assert!(back
            .field("b")
            .unwrap()
            .iter()
            .all(|v| v.is_sign_negative()));
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Snapshot::read_from(&mut bad.as_slice()),
            Err(SnapshotError::BadMagic)
        ));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            Snapshot::read_from(&mut bad.as_slice()),
            Err(SnapshotError::UnsupportedVersion(2))
        ));
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(
            Snapshot::read_from(&mut &truncated[..]),
            Err(SnapshotError::Io(_))
        ));
    }

    #[test]
    fn field_validation() {
        let mut s = Snapshot::new(8, 0.0);
        assert!(matches!(
            s.push("x", vec![0.0; 10]),
            Err(SnapshotError::FieldLength { .. })
        ));
        s.push("x", vec![0.0; 64]).unwrap();
        assert!(matches!(
            s.push("x", vec![0.0; 64]),
            Err(SnapshotError::DuplicateField(_))
        ));
        assert!(matches!(s.scalar("y"), Err(SnapshotError::MissingField(_))));
    }
}
