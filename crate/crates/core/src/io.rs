//! JSON file formats shared by the library and the command-line tool.
//!
//! A matrix is `{"dim": d, "entries": [[re, im], ...]}` with the `d²`
//! entries in row-major order. Density matrices and effects use this form
//! directly; a POVM is `{"dim": d, "effects": [<matrix>, ...]}` and a
//! measurement record is
//! `{"dim": d, "items": [{"effect": <matrix>, "count": n, "weight": w}]}`.
//! Floats are written in shortest round-trip form, so reading a written
//! file reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SolverDiagnostics;
use crate::likelihood::{MeasurementRecord, RecordItem};
use crate::linalg::{CMatrix, C64};
use crate::state::{DensityMatrix, Effect, Povm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim: d, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        if self.entries.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                found: self.entries.len(),
            });
        }
        Ok(CMatrix::from_row_iterator(
            d,
            d,
            self.entries.iter().map(|&[re, im]| C64::new(re, im)),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub dim: usize,
    pub effects: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordItemJson {
    pub effect: MatrixJson,
    pub count: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordJson {
    pub dim: usize,
    pub items: Vec<RecordItemJson>,
}

fn check_dim(expected: usize, m: &MatrixJson) -> Result<()> {
    if m.dim != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.dim,
        });
    }
    Ok(())
}

pub fn density_matrix_to_json(rho: &DensityMatrix) -> MatrixJson {
    MatrixJson::from_matrix(rho.matrix())
}

pub fn density_matrix_from_json(m: &MatrixJson) -> Result<DensityMatrix> {
    DensityMatrix::new(m.to_matrix()?)
}

pub fn povm_to_json(povm: &Povm) -> PovmJson {
    PovmJson {
        dim: povm.dim(),
        effects: povm
            .effects()
            .iter()
            .map(|e| MatrixJson::from_matrix(e.matrix()))
            .collect(),
    }
}

pub fn povm_from_json(p: &PovmJson) -> Result<Povm> {
    let effects = p
        .effects
        .iter()
        .map(|m| {
            check_dim(p.dim, m)?;
            Effect::new(m.to_matrix()?)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

pub fn record_to_json(rec: &MeasurementRecord) -> RecordJson {
    RecordJson {
        dim: rec.dim(),
        items: rec
            .items()
            .iter()
            .map(|i| RecordItemJson {
                effect: MatrixJson::from_matrix(i.effect.matrix()),
                count: i.count,
                weight: i.weight,
            })
            .collect(),
    }
}

pub fn record_from_json(r: &RecordJson) -> Result<MeasurementRecord> {
    let items = r
        .items
        .iter()
        .map(|i| {
            check_dim(r.dim, &i.effect)?;
            Ok(RecordItem {
                effect: Effect::new(i.effect.to_matrix()?)?,
                count: i.count,
                weight: i.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementRecord::new(items)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_record(path: &Path) -> Result<MeasurementRecord> {
    record_from_json(&read_json(path)?)
}

pub fn write_record(path: &Path, rec: &MeasurementRecord) -> Result<()> {
    write_json(path, &record_to_json(rec))
}

pub fn read_density_matrix(path: &Path) -> Result<DensityMatrix> {
    density_matrix_from_json(&read_json(path)?)
}

pub fn write_density_matrix(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_json(path, &density_matrix_to_json(rho))
}

/// Path of the diagnostics file written next to an estimate:
/// `est.json` becomes `est.diagnostics.json`.
pub fn diagnostics_path(estimate: &Path) -> std::path::PathBuf {
    let stem = estimate
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    estimate.with_file_name(format!("{stem}.diagnostics.json"))
}

pub fn write_diagnostics(path: &Path, diag: &SolverDiagnostics) -> Result<()> {
    write_json(path, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::pool_measurements;
    use crate::state::from_bloch;
    use crate::BlochVector;

    #[test]
    fn matrix_layout_is_row_major() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 3.0),
                C64::new(4.0, 5.0),
                C64::new(6.0, 0.0),
            ],
        );
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(
            j.entries,
            vec![[1.0, 0.0], [2.0, 3.0], [4.0, 5.0], [6.0, 0.0]]
        );
        assert_eq!(j.to_matrix().unwrap(), m);
    }

    #[test]
    fn density_matrix_round_trips_exactly() {
        let rho = from_bloch(BlochVector::new(0.1, -0.2 / 3.0, 0.7)).unwrap();
        let text = to_json_string(&density_matrix_to_json(&rho)).unwrap();
        let back = density_matrix_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn record_round_trips_exactly() {
        let runs: Vec<(Povm, Vec<u64>)> = (0..3)
            .map(|a| (Povm::pauli_axis(a), vec![3 + a as u64, 7]))
            .collect();
        let rec = pool_measurements(&runs).unwrap();
        let text = to_json_string(&record_to_json(&rec)).unwrap();
        let back = record_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(record_to_json(&back), record_to_json(&rec));
        assert_eq!(to_json_string(&record_to_json(&back)).unwrap(), text);
    }

    #[test]
    fn povm_round_trips() {
        let p = Povm::pauli_axis(1);
        let back = povm_from_json(&povm_to_json(&p)).unwrap();
        for (a, b) in back.effects().iter().zip(p.effects()) {
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn schema_violations_are_reported() {
        let err = serde_json::from_str::<RecordJson>(
            r#"{"dim": 2, "items": [{"effect": {"dim": 2, "entries": []}, "weight": 1}]}"#,
        )
        .map_err(Error::from)
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("count"), "{msg}");
        assert!(msg.contains("line"), "{msg}");

        let short = MatrixJson {
            dim: 2,
            entries: vec![[1.0, 0.0]],
        };
        assert!(matches!(
            short.to_matrix(),
            Err(Error::LengthMismatch { .. })
        ));

        let wrong_dim = RecordJson {
            dim: 3,
            items: vec![RecordItemJson {
                effect: MatrixJson::from_matrix(&CMatrix::identity(2, 2)),
                count: 1,
                weight: 1.0,
            }],
        };
        assert!(matches!(
            record_from_json(&wrong_dim),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diagnostics_sidecar_name() {
        assert_eq!(
            diagnostics_path(Path::new("/tmp/out/est.json")),
            Path::new("/tmp/out/est.diagnostics.json")
        );
    }
}
