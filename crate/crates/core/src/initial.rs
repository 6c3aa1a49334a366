//! Built-in and tabulated initial densities.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec};
use crate::linalg::compensated_sum;

/// Quadrature points per axis used by [`InitialCondition::domain_average`].
const AVERAGE_POINTS_1D: usize = 4096;
const AVERAGE_POINTS_2D: usize = 1024;

/// Trace species level used by both three-species examples.
pub const TRACE_LEVEL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Three species on `[0, 1]`: a V-shaped first species, a trace second
    /// species and the remainder in the third.
    ThreeSpecies1d,
    /// Three species on `[0, 1]²` with a cone-shaped dip of the first species
    /// around the center.
    ThreeSpecies2d,
    /// Two species, `ρ₁ = ½ + A cos 2πx`, `ρ₂ = 1 − ρ₁`.
    TwoSpeciesCosine { amplitude: f64 },
    /// Values read from a CSV file: one row per cell in storage order, one
    /// column per species; columns named `x` or `y` are skipped.
    Tabulated(PathBuf),
}

impl InitialCondition {
    pub fn name(&self) -> String {
        match self {
            InitialCondition::ThreeSpecies1d => "paper-1d".into(),
            InitialCondition::ThreeSpecies2d => "paper-2d".into(),
            InitialCondition::TwoSpeciesCosine { .. } => "two-species-cosine".into(),
            InitialCondition::Tabulated(p) => format!("file:{}", p.display()),
        }
    }

    /// Number of species the condition defines, if fixed.
    pub fn species(&self) -> Option<usize> {
        match self {
            InitialCondition::ThreeSpecies1d | InitialCondition::ThreeSpecies2d => Some(3),
            InitialCondition::TwoSpeciesCosine { .. } => Some(2),
            InitialCondition::Tabulated(_) => None,
        }
    }

    pub(crate) fn check_species(&self, n: usize) -> Result<()> {
        match self.species() {
            Some(k) if k != n => Err(Error::Dimension(format!(
                "initial condition {} has {k} species, configuration asks for {n}",
                self.name()
            ))),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match (self, dim) {
            (InitialCondition::ThreeSpecies1d, 1) | (InitialCondition::ThreeSpecies2d, 2) => Ok(()),
            (InitialCondition::ThreeSpecies1d, _) | (InitialCondition::ThreeSpecies2d, _) => Err(Error::Dimension(format!(
                "initial condition {} is not defined in {dim}D",
                self.name()
            ))),
            (InitialCondition::TwoSpeciesCosine { amplitude }, _) => {
                if !(amplitude.abs() < 0.5) {
                    return Err(Error::Dimension(format!(
                        "cosine amplitude {amplitude} must be below 1/2 in magnitude"
                    )));
                }
                Ok(())
            }
            (InitialCondition::Tabulated(_), _) => Ok(()),
        }
    }

    /// Point value at `x` for analytic conditions; coordinates are taken
    /// modulo the unit period.
    pub fn point_value(&self, species: usize, x: [f64; 2]) -> Option<f64> {
        let first = match self {
            InitialCondition::ThreeSpecies1d => v_profile(x[0]),
            InitialCondition::ThreeSpecies2d => cone_profile(x[0], x[1]),
            InitialCondition::TwoSpeciesCosine { amplitude } => {
                let a = 0.5 + amplitude * (std::f64::consts::TAU * x[0]).cos();
                return Some(if species == 0 { a } else { 1.0 - a });
            }
            InitialCondition::Tabulated(_) => return None,
        };
        Some(match species {
            0 => first,
            1 => TRACE_LEVEL,
            _ => 1.0 - first - TRACE_LEVEL,
        })
    }

    /// Samples the condition at cell centers `x_ℓ = ℓh`.
    pub fn sample(&self, grid: &GridSpec, species: usize) -> Result<CellField> {
        self.check_species(species)?;
        self.check_dim(grid.dim())?;
        match self {
            InitialCondition::Tabulated(path) => read_table(path, grid, species),
            _ => Ok(CellField::from_fn(*grid, species, |i, x| {
                self.point_value(i, x).expect("analytic condition")
            })),
        }
    }

    /// Domain average of each species, by midpoint quadrature on a fine
    /// lattice aligned with the quarter points. For tabulated data, the cell
    /// mean of the table.
    pub fn domain_average(&self, grid: &GridSpec, species: usize) -> Result<Vec<f64>> {
        self.check_species(species)?;
        self.check_dim(grid.dim())?;
        if let InitialCondition::Tabulated(_) = self {
            let f = self.sample(grid, species)?;
            let nc = grid.cell_count() as f64;
            return Ok((0..species).map(|i| f.component_sum(i) / nc).collect());
        }
        let dim = grid.dim();
        let q = if dim == 1 { AVERAGE_POINTS_1D } else { AVERAGE_POINTS_2D };
        let count = q.pow(dim as u32);
        Ok((0..species)
            .map(|i| {
                let total = compensated_sum((0..count).map(|k| {
                    let x = [(k % q) as f64 + 0.5, (k / q) as f64 + 0.5];
                    self.point_value(i, [x[0] / q as f64, x[1] / q as f64]).expect("analytic")
                }));
                total / count as f64
            })
            .collect())
    }
}

fn v_profile(x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if x < 0.25 {
        0.8
    } else if x < 0.5 {
        1.6 * (0.75 - x)
    } else if x < 0.75 {
        1.6 * (x - 0.25)
    } else {
        0.8
    }
}

fn cone_profile(x: f64, y: f64) -> f64 {
    let (x, y) = (x.rem_euclid(1.0), y.rem_euclid(1.0));
    let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
    if r <= 0.125 {
        r / 2.0 + 0.1
    } else {
        0.6
    }
}

fn read_table(path: &Path, grid: &GridSpec, species: usize) -> Result<CellField> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let columns: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| *h != "x" && *h != "y")
        .map(|(k, _)| k)
        .collect();
    if columns.len() != species {
        return Err(Error::Dimension(format!(
            "{} has {} species columns, expected {species}",
            path.display(),
            columns.len()
        )));
    }
    let nc = grid.cell_count();
    let mut values = vec![0.0; species * nc];
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if r >= nc {
            rows = r + 1;
            break;
        }
        for (i, &col) in columns.iter().enumerate() {
            let raw = record.get(col).unwrap_or("");
            values[i * nc + r] = raw.parse().map_err(|_| {
                Error::Dimension(format!("{}: row {}, column {}: `{raw}` is not a number", path.display(), r + 2, col + 1))
            })?;
        }
        rows = r + 1;
    }
    if rows != nc {
        return Err(Error::Dimension(format!(
            "{} has {rows}{} rows, grid has {nc} cells",
            path.display(),
            if rows > nc { "+" } else { "" }
        )));
    }
    CellField::new(*grid, species, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn v_profile_values() {
        assert_eq!(v_profile(0.1), 0.8);
        assert!((v_profile(0.5) - 0.4).abs() < 1e-15);
        assert!((v_profile(0.25) - 0.8).abs() < 1e-15);
        assert!((v_profile(0.625) - 0.6).abs() < 1e-15);
        assert_eq!(v_profile(1.0), 0.8);
    }

    #[test]
    fn v_profile_average() {
        let g = GridSpec::new(1, 100, 1.0).unwrap();
        let avg = InitialCondition::ThreeSpecies1d.domain_average(&g, 3).unwrap();
        assert!((avg[0] - 0.7).abs() < 1e-13);
        assert!((avg[1] - 1e-4).abs() < 1e-17);
        assert!((avg[2] - 0.2999).abs() < 1e-13);
    }

    #[test]
    fn sampling_sums_to_one() {
        for (ic, dim) in [
            (InitialCondition::ThreeSpecies1d, 1),
            (InitialCondition::ThreeSpecies2d, 2),
            (InitialCondition::TwoSpeciesCosine { amplitude: 0.1 }, 1),
        ] {
            let g = GridSpec::new(dim, 20, 1.0).unwrap();
            let n = ic.species().unwrap();
            let f = ic.sample(&g, n).unwrap();
            for c in 0..g.cell_count() {
                let s: f64 = f.at_cell(c).iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
            assert!(f.min_value() > 0.0);
        }
    }

    #[test]
    fn cone_values() {
        assert!((cone_profile(0.5, 0.5) - 0.1).abs() < 1e-15);
        assert_eq!(cone_profile(0.1, 0.1), 0.6);
        assert!((cone_profile(0.6, 0.5) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn mismatched_requests_fail() {
        let g1 = GridSpec::new(1, 8, 1.0).unwrap();
        let g2 = GridSpec::new(2, 8, 1.0).unwrap();
        assert!(InitialCondition::ThreeSpecies1d.sample(&g1, 2).is_err());
        assert!(InitialCondition::ThreeSpecies1d.sample(&g2, 3).is_err());
        assert!(InitialCondition::TwoSpeciesCosine { amplitude: 0.6 }.sample(&g1, 2).is_err());
    }

    #[test]
    fn tabulated_round_trip() {
        let g = GridSpec::new(1, 4, 1.0).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x,rho1,rho2").unwrap();
        for (x, a) in [(0.25, 0.2), (0.5, 0.4), (0.75, 0.6), (1.0, 0.8)] {
            writeln!(file, "{x},{a},{}", 1.0 - a).unwrap();
        }
        let ic = InitialCondition::Tabulated(file.path().to_path_buf());
        let f = ic.sample(&g, 2).unwrap();
        assert_eq!(f.component(0), &[0.2, 0.4, 0.6, 0.8]);
        let avg = ic.domain_average(&g, 2).unwrap();
        assert!((avg[0] - 0.5).abs() < 1e-15);
        let g5 = GridSpec::new(1, 5, 1.0).unwrap();
        assert!(ic.sample(&g5, 2).is_err());
        assert!(ic.sample(&g, 3).is_err());
    }
}
