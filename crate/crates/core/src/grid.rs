//! Periodic staggered lattices and the discrete calculus built on them.
//!
//! Cells are numbered `ℓ = 1..N` along every axis and sit at `x = ℓ h`.
//! Storage is zero based: cell index `c` holds the value at `(c + 1) h`.
//! Edge `c` along axis `s` sits half a spacing past cell `c`, between cell `c`
//! and its successor along `s`; the last edge wraps back onto cell 0.
//!
//! In two dimensions the flat cell index is `i + N j` with `i` along x.
//!
//! ```text
//!   cell:    0       1       2     ...    N-1
//!         |---o---|---o---|---o---| ... |---o---|
//!   edge:         0       1       2            N-1 (≡ edge ½)
//! ```

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

/// Square periodic lattice on `[0, L]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    cells_per_axis: usize,
    length: f64,
    spacing: f64,
}

impl GridSpec {
    pub fn new(dim: usize, cells_per_axis: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if cells_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per axis, got {cells_per_axis}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("domain length must be positive, got {length}")));
        }
        Ok(Self {
            dim,
            cells_per_axis,
            length,
            spacing: length / cells_per_axis as f64,
        })
    }

    /// Grid whose spacing is `h`; fails unless `h` divides `length`.
    pub fn with_spacing(dim: usize, spacing: f64, length: f64) -> Result<Self> {
        let ratio = length / spacing;
        let cells = ratio.round();
        if !(spacing > 0.0) || (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::NonDivisibleSpacing { spacing, length });
        }
        Self::new(dim, cells as usize, length)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of cells, `N^d`. Equal to the number of edges per axis.
    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// `h^d`, the weight of the discrete inner products.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Per-axis lattice indices (zero based) of a flat cell index.
    pub fn axis_indices(&self, cell: usize) -> [usize; 2] {
        let n = self.cells_per_axis;
        if self.dim == 1 {
            [cell, 0]
        } else {
            [cell % n, cell / n]
        }
    }

    /// Coordinates of a cell center; unused axes read 0.
    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let idx = self.axis_indices(cell);
        let mut x = [0.0; 2];
        for s in 0..self.dim {
            x[s] = (idx[s] + 1) as f64 * self.spacing;
        }
        x
    }

    /// Coordinates of edge `cell` along `axis`.
    pub fn edge_center(&self, axis: usize, cell: usize) -> [f64; 2] {
        let mut x = self.cell_center(cell);
        x[axis] += 0.5 * self.spacing;
        x
    }

    /// Neighbor of `cell` one step forward along `axis`, with wraparound.
    pub fn forward(&self, cell: usize, axis: usize) -> usize {
        self.shift(cell, axis, 1)
    }

    /// Neighbor of `cell` one step backward along `axis`, with wraparound.
    pub fn backward(&self, cell: usize, axis: usize) -> usize {
        self.shift(cell, axis, -1)
    }

    /// Cyclic shift of a cell index by `k` positions along `axis`.
    pub fn shift(&self, cell: usize, axis: usize, k: isize) -> usize {
        let n = self.cells_per_axis as isize;
        let mut idx = self.axis_indices(cell);
        idx[axis] = (idx[axis] as isize + k).rem_euclid(n) as usize;
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] + self.cells_per_axis * idx[1]
        }
    }

    fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::Dimension(format!(
                "{what}: field lives on a {}D N={} grid, operator expects {}D N={}",
                other.dim, other.cells_per_axis, self.dim, self.cells_per_axis
            )));
        }
        Ok(())
    }
}

/// Per-species values on cell centers, stored species-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: GridSpec,
    species: usize,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(grid: GridSpec, species: usize, values: Vec<f64>) -> Result<Self> {
        if species == 0 {
            return Err(Error::Dimension("a cell field needs at least one species".into()));
        }
        let expected = species * grid.cell_count();
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "cell field has {} values, expected {expected}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                species: pos / grid.cell_count(),
                index: pos % grid.cell_count(),
            });
        }
        Ok(Self {
            grid,
            species,
            values,
        })
    }

    pub fn zeros(grid: GridSpec, species: usize) -> Self {
        Self {
            grid,
            species,
            values: vec![0.0; species * grid.cell_count()],
        }
    }

    /// Samples `f(species, x)` at every cell center.
    pub fn from_fn(grid: GridSpec, species: usize, mut f: impl FnMut(usize, [f64; 2]) -> f64) -> Self {
        let nc = grid.cell_count();
        let mut values = Vec::with_capacity(species * nc);
        for i in 0..species {
            for c in 0..nc {
                values.push(f(i, grid.cell_center(c)));
            }
        }
        Self {
            grid,
            species,
            values,
        }
    }

    pub(crate) fn from_raw(grid: GridSpec, species: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), species * grid.cell_count());
        Self {
            grid,
            species,
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, species: usize, cell: usize) -> f64 {
        self.values[species * self.grid.cell_count() + cell]
    }

    pub fn set(&mut self, species: usize, cell: usize, value: f64) {
        let nc = self.grid.cell_count();
        self.values[species * nc + cell] = value;
    }

    pub fn component(&self, species: usize) -> &[f64] {
        let nc = self.grid.cell_count();
        &self.values[species * nc..(species + 1) * nc]
    }

    pub fn component_mut(&mut self, species: usize) -> &mut [f64] {
        let nc = self.grid.cell_count();
        &mut self.values[species * nc..(species + 1) * nc]
    }

    /// Compensated `Σ_ℓ f_{i,ℓ}` for one species (no `h^d` weight).
    pub fn component_sum(&self, species: usize) -> f64 {
        compensated_sum(self.component(species).iter().copied())
    }

    /// Densities of all species at one cell.
    pub fn at_cell(&self, cell: usize) -> Vec<f64> {
        (0..self.species).map(|i| self.get(i, cell)).collect()
    }

    /// The first `count` species as a new field.
    pub fn leading_species(&self, count: usize) -> CellField {
        let nc = self.grid.cell_count();
        Self::from_raw(self.grid, count, self.values[..count * nc].to_vec())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_like(&self, other: &CellField, what: &str) -> Result<()> {
        self.grid.check_same(&other.grid, what)?;
        if self.species != other.species {
            return Err(Error::Dimension(format!(
                "{what}: {} species vs {}",
                self.species, other.species
            )));
        }
        Ok(())
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec, what: &str) -> Result<()> {
        grid.check_same(&self.grid, what)
    }
}

/// Per-species, per-axis values on edge midpoints.
///
/// Layout: `values[(species * dim + axis) * cell_count + cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    grid: GridSpec,
    species: usize,
    values: Vec<f64>,
}

impl EdgeField {
    pub fn new(grid: GridSpec, species: usize, values: Vec<f64>) -> Result<Self> {
        let expected = species * grid.dim() * grid.cell_count();
        if species == 0 || values.len() != expected {
            return Err(Error::Dimension(format!(
                "edge field has {} values, expected {expected}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let per_species = grid.dim() * grid.cell_count();
            return Err(Error::NonFinite {
                species: pos / per_species,
                index: pos % per_species,
            });
        }
        Ok(Self {
            grid,
            species,
            values,
        })
    }

    pub fn zeros(grid: GridSpec, species: usize) -> Self {
        Self {
            grid,
            species,
            values: vec![0.0; species * grid.dim() * grid.cell_count()],
        }
    }

    /// Samples `f(species, axis, x)` at every edge midpoint.
    pub fn from_fn(grid: GridSpec, species: usize, mut f: impl FnMut(usize, usize, [f64; 2]) -> f64) -> Self {
        let nc = grid.cell_count();
        let mut values = Vec::with_capacity(species * grid.dim() * nc);
        for i in 0..species {
            for s in 0..grid.dim() {
                for c in 0..nc {
                    values.push(f(i, s, grid.edge_center(s, c)));
                }
            }
        }
        Self {
            grid,
            species,
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn offset(&self, species: usize, axis: usize) -> usize {
        (species * self.grid.dim() + axis) * self.grid.cell_count()
    }

    pub fn get(&self, species: usize, axis: usize, cell: usize) -> f64 {
        self.values[self.offset(species, axis) + cell]
    }

    pub fn set(&mut self, species: usize, axis: usize, cell: usize, value: f64) {
        let o = self.offset(species, axis);
        self.values[o + cell] = value;
    }

    pub fn component(&self, species: usize, axis: usize) -> &[f64] {
        let o = self.offset(species, axis);
        &self.values[o..o + self.grid.cell_count()]
    }

    pub fn component_mut(&mut self, species: usize, axis: usize) -> &mut [f64] {
        let o = self.offset(species, axis);
        let nc = self.grid.cell_count();
        &mut self.values[o..o + nc]
    }

    pub(crate) fn check_like(&self, other: &EdgeField, what: &str) -> Result<()> {
        self.grid.check_same(&other.grid, what)?;
        if self.species != other.species {
            return Err(Error::Dimension(format!(
                "{what}: {} species vs {}",
                self.species, other.species
            )));
        }
        Ok(())
    }
}

/// Forward difference onto edges: `(D_h f)_{ℓ+½} = (f_{ℓ+1} − f_ℓ)/h` along each axis.
pub fn gradient_to_edges(f: &CellField, grid: &GridSpec) -> Result<EdgeField> {
    f.check_grid(grid, "gradient_to_edges")?;
    let mut out = EdgeField::zeros(*grid, f.species());
    let inv_h = 1.0 / grid.spacing();
    for i in 0..f.species() {
        let src = f.component(i);
        for s in 0..grid.dim() {
            let dst = out.component_mut(i, s);
            for (c, d) in dst.iter_mut().enumerate() {
                *d = (src[grid.forward(c, s)] - src[c]) * inv_h;
            }
        }
    }
    Ok(out)
}

/// Backward difference onto cells summed over axes:
/// `(d_h φ)_ℓ = Σ_s (φ_{ℓ+½e_s} − φ_{ℓ−½e_s})/h`.
pub fn divergence_to_cells(phi: &EdgeField, grid: &GridSpec) -> Result<CellField> {
    grid.check_same(phi.grid(), "divergence_to_cells")?;
    let nc = grid.cell_count();
    let inv_h = 1.0 / grid.spacing();
    let mut out = CellField::zeros(*grid, phi.species());
    for i in 0..phi.species() {
        let dst = out.component_mut(i);
        for s in 0..grid.dim() {
            let src = phi.component(i, s);
            for c in 0..nc {
                dst[c] += (src[c] - src[grid.backward(c, s)]) * inv_h;
            }
        }
    }
    Ok(out)
}

/// Arithmetic mean of the two cells adjacent to each edge.
pub fn average_to_edges(f: &CellField, grid: &GridSpec) -> Result<EdgeField> {
    f.check_grid(grid, "average_to_edges")?;
    let mut out = EdgeField::zeros(*grid, f.species());
    for i in 0..f.species() {
        let src = f.component(i);
        for s in 0..grid.dim() {
            let dst = out.component_mut(i, s);
            for (c, d) in dst.iter_mut().enumerate() {
                *d = 0.5 * (src[c] + src[grid.forward(c, s)]);
            }
        }
    }
    Ok(out)
}

/// `⟨f, g⟩ = h^d Σ_{i,ℓ} f_{i,ℓ} g_{i,ℓ}`.
pub fn inner_cells(f: &CellField, g: &CellField) -> Result<f64> {
    f.check_like(g, "inner_cells")?;
    let vol = f.grid().cell_volume();
    Ok(vol * compensated_sum(f.values().iter().zip(g.values()).map(|(a, b)| a * b)))
}

/// `[φ, ψ] = h^d Σ_{i,s,ℓ} φ_{i,s,ℓ+½} ψ_{i,s,ℓ+½}`.
pub fn inner_edges(phi: &EdgeField, psi: &EdgeField) -> Result<f64> {
    phi.check_like(psi, "inner_edges")?;
    let vol = phi.grid().cell_volume();
    Ok(vol * compensated_sum(phi.values().iter().zip(psi.values()).map(|(a, b)| a * b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, n, 1.0).unwrap()
    }

    fn random_cells(grid: GridSpec, species: usize, rng: &mut ChaCha8Rng) -> CellField {
        CellField::from_fn(grid, species, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_edges(grid: GridSpec, species: usize, rng: &mut ChaCha8Rng) -> EdgeField {
        EdgeField::from_fn(grid, species, |_, _, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(3, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 3, 1.0).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        assert!(matches!(
            GridSpec::with_spacing(1, 0.3, 1.0),
            Err(Error::NonDivisibleSpacing { .. })
        ));
        let g = GridSpec::with_spacing(2, 0.05, 1.0).unwrap();
        assert_eq!(g.cells_per_axis(), 20);
    }

    #[test]
    fn spacing_times_count_is_length() {
        for n in [4, 7, 10, 33, 99, 100, 1000] {
            let g = GridSpec::new(1, n, 1.0).unwrap();
            assert!((g.spacing() * n as f64 - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn gradient_example() {
        let g = grid1(4);
        let f = CellField::new(g, 1, vec![1.0, 2.0, 4.0, 1.0]).unwrap();
        let d = gradient_to_edges(&f, &g).unwrap();
        assert_eq!(d.values(), &[4.0, 8.0, -12.0, 0.0]);
    }

    #[test]
    fn divergence_example() {
        let g = grid1(4);
        let phi = EdgeField::new(g, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let d = divergence_to_cells(&phi, &g).unwrap();
        assert_eq!(d.values(), &[4.0, -4.0, 0.0, 0.0]);
    }

    #[test]
    fn average_example() {
        let g = grid1(4);
        let f = CellField::new(g, 1, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let a = average_to_edges(&f, &g).unwrap();
        assert_eq!(a.values(), &[2.0, 4.0, 6.0, 4.0]);
    }

    #[test]
    fn constants_are_annihilated_or_preserved() {
        for dim in [1, 2] {
            let g = GridSpec::new(dim, 6, 2.0).unwrap();
            let f = CellField::from_fn(g, 2, |i, _| 1.5 + i as f64);
            assert!(gradient_to_edges(&f, &g).unwrap().values().iter().all(|v| *v == 0.0));
            let avg = average_to_edges(&f, &g).unwrap();
            for i in 0..2 {
                for s in 0..dim {
                    assert!(avg.component(i, s).iter().all(|v| *v == 1.5 + i as f64));
                }
            }
            let phi = EdgeField::from_fn(g, 2, |i, s, _| 0.3 * (i + s) as f64 - 1.0);
            assert!(divergence_to_cells(&phi, &g).unwrap().values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn unit_inner_product_is_domain_length() {
        let g = grid1(4);
        let one = CellField::new(g, 1, vec![1.0; 4]).unwrap();
        assert_eq!(inner_cells(&one, &one).unwrap(), 1.0);
    }

    #[test]
    fn inner_product_is_positive_definite() {
        let g = grid1(5);
        let zero = CellField::zeros(g, 2);
        assert_eq!(inner_cells(&zero, &zero).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_cells(g, 2, &mut rng);
        assert!(inner_cells(&f, &f).unwrap() > 0.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = grid1(4);
        let g2 = grid1(5);
        let f = CellField::zeros(g, 1);
        assert!(matches!(gradient_to_edges(&f, &g2), Err(Error::Dimension(_))));
        assert!(matches!(average_to_edges(&f, &g2), Err(Error::Dimension(_))));
        let phi = EdgeField::zeros(g, 1);
        assert!(matches!(divergence_to_cells(&phi, &g2), Err(Error::Dimension(_))));
        assert!(inner_cells(&f, &CellField::zeros(g, 2)).is_err());
        assert!(CellField::new(g, 1, vec![0.0; 3]).is_err());
        assert!(CellField::new(g, 1, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gradient_of_sine_is_second_order() {
        let err = |n: usize| {
            let g = grid1(n);
            let tau = std::f64::consts::TAU;
            let f = CellField::from_fn(g, 1, |_, x| (tau * x[0]).sin());
            let d = gradient_to_edges(&f, &g).unwrap();
            (0..n)
                .map(|c| (d.get(0, 0, c) - tau * (tau * g.edge_center(0, c)[0]).cos()).abs())
                .fold(0.0, f64::max)
        };
        let e64 = err(64);
        let e128 = err(128);
        let ratio = e64 / e128;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        // C h² with C from the finer level bounds the coarser error too.
        let c = e128 * 128.0 * 128.0;
        assert!(e64 <= 1.01 * c / (64.0 * 64.0));
    }

    #[test]
    fn summation_by_parts_1d_and_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [1, 2] {
            for n in [4, 7, 16] {
                let g = GridSpec::new(dim, n, 1.3).unwrap();
                let f = random_cells(g, 3, &mut rng);
                let phi = random_edges(g, 3, &mut rng);
                let lhs = inner_cells(&f, &divergence_to_cells(&phi, &g).unwrap()).unwrap();
                let rhs = inner_edges(&gradient_to_edges(&f, &g).unwrap(), &phi).unwrap();
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!((lhs + rhs).abs() <= 1e-13 * scale, "dim {dim} n {n}: {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn two_dimensional_layout() {
        let g = GridSpec::new(2, 4, 1.0).unwrap();
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.forward(3, 0), 0);
        assert_eq!(g.forward(3, 1), 7);
        assert_eq!(g.backward(0, 1), 12);
        assert_eq!(g.cell_center(5), [0.5, 0.5]);
        assert_eq!(g.edge_center(1, 5), [0.5, 0.625]);
    }

    proptest! {
        #[test]
        fn average_of_positive_is_positive(vals in prop::collection::vec(1e-12f64..10.0, 6)) {
            let g = grid1(6);
            let f = CellField::new(g, 1, vals).unwrap();
            let a = average_to_edges(&f, &g).unwrap();
            prop_assert!(a.values().iter().all(|v| *v > 0.0));
        }

        #[test]
        fn operators_are_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(2, 5, 1.0).unwrap();
            let f1 = random_cells(g, 2, &mut rng);
            let f2 = random_cells(g, 2, &mut rng);
            let combo = CellField::from_raw(
                g, 2,
                f1.values().iter().zip(f2.values()).map(|(x, y)| a * x + b * y).collect(),
            );
            let d1 = gradient_to_edges(&f1, &g).unwrap();
            let d2 = gradient_to_edges(&f2, &g).unwrap();
            let dc = gradient_to_edges(&combo, &g).unwrap();
            for k in 0..dc.values().len() {
                let expect = a * d1.values()[k] + b * d2.values()[k];
                prop_assert!((dc.values()[k] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
            let ac = average_to_edges(&combo, &g).unwrap();
            let a1 = average_to_edges(&f1, &g).unwrap();
            let a2 = average_to_edges(&f2, &g).unwrap();
            for k in 0..ac.values().len() {
                let expect = a * a1.values()[k] + b * a2.values()[k];
                prop_assert!((ac.values()[k] - expect).abs() <= 1e-13 * (1.0 + expect.abs()));
            }
        }

        #[test]
        fn shifting_input_shifts_output(shift in 0isize..7, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(2, 7, 1.0).unwrap();
            let f = random_cells(g, 1, &mut rng);
            let nc = g.cell_count();
            let shifted = CellField::from_raw(
                g, 1,
                (0..nc).map(|c| f.get(0, g.shift(c, 0, -shift))).collect(),
            );
            let d = gradient_to_edges(&f, &g).unwrap();
            let ds = gradient_to_edges(&shifted, &g).unwrap();
            for s in 0..2 {
                for c in 0..nc {
                    prop_assert_eq!(ds.get(0, s, c), d.get(0, s, g.shift(c, 0, -shift)));
                }
            }
            let phi = random_edges(g, 1, &mut rng);
            let phis = EdgeField::from_fn(g, 1, |_, _, _| 0.0);
            let mut phis = phis;
            for s in 0..2 {
                for c in 0..nc {
                    phis.set(0, s, c, phi.get(0, s, g.shift(c, 0, -shift)));
                }
            }
            let dv = divergence_to_cells(&phi, &g).unwrap();
            let dvs = divergence_to_cells(&phis, &g).unwrap();
            for c in 0..nc {
                prop_assert_eq!(dvs.get(0, c), dv.get(0, g.shift(c, 0, -shift)));
            }
        }
    }
}
