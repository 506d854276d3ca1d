//! Eigenvalue sheets over the `(θ, J/G)` plane with branch continuity.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eig2_closed, permutations, SpectraError, Spectrum};
use crate::model::EffectiveParams;
use crate::scalar::Real;

/// One grid node: raw eigenvalues plus the branch label of each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint<T> {
    pub theta: T,
    pub ratio: T,
    pub spectrum: Spectrum<T>,
}

/// Row-major grid of sheet points, `θ` outer and `J/G` inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetGrid<T> {
    pub theta_axis: Vec<T>,
    pub ratio_axis: Vec<T>,
    pub points: Vec<SheetPoint<T>>,
}

impl<T: Real> SheetGrid<T> {
    pub fn get(&self, theta_index: usize, ratio_index: usize) -> &SheetPoint<T> {
        &self.points[theta_index * self.ratio_axis.len() + ratio_index]
    }

    pub fn branch_count(&self) -> usize {
        self.points.first().map_or(0, |p| p.spectrum.len())
    }

    /// Largest jump of any tracked branch between neighbouring `θ` nodes.
    pub fn max_branch_jump(&self) -> T {
        let nr = self.ratio_axis.len();
        let mut worst = T::zero();
        for t in 1..self.theta_axis.len() {
            for r in 0..nr {
                let a = self.get(t - 1, r).spectrum.by_branch();
                let b = self.get(t, r).spectrum.by_branch();
                for (x, y) in a.iter().zip(&b) {
                    worst = worst.max((x - y).norm());
                }
            }
        }
        worst
    }
}

/// Branch labels for `next` continuing the branches of `previous`
/// (`previous[k]` is branch `k`). Nearest-neighbour matching by total
/// distance; near-ties are broken by the distance of real parts.
pub fn track_branches<T: Real>(previous: &[Complex<T>], next: &[Complex<T>]) -> Vec<usize> {
    assert_eq!(previous.len(), next.len(), "branch count changed");
    let n = next.len();
    let scale = previous.iter().chain(next).fold(T::one(), |acc, z| acc.max(z.norm()));
    let tie = T::lit(1e-12) * scale;
    let mut best: Option<(T, T, Vec<usize>)> = None;
    for perm in permutations(n) {
        let (cost, re_cost) = perm.iter().enumerate().fold((T::zero(), T::zero()), |(c, r), (k, &p)| {
            (
                c + (previous[k] - next[p]).norm(),
                r + (previous[k].re - next[p].re).abs(),
            )
        });
        let better = match &best {
            None => true,
            Some((bc, br, _)) => cost < *bc - tie || ((cost - *bc).abs() <= tie && re_cost < *br),
        };
        if better {
            best = Some((cost, re_cost, perm));
        }
    }
    let perm = best.map(|(_, _, p)| p).unwrap_or_default();
    let mut ids = vec![0; n];
    for (branch, &raw) in perm.iter().enumerate() {
        ids[raw] = branch;
    }
    ids
}

fn check_axis<T: Real>(name: &str, axis: &[T]) -> Result<(), SpectraError> {
    if axis.is_empty() {
        return Err(SpectraError::Grid(format!("{name} grid is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(SpectraError::Grid(format!("{name} grid has non-finite entries")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::Grid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Evaluate `spectrum_at(θ, ratio)` over the grid and track branches along `θ`
/// for every ratio. Columns are computed in parallel; the result does not
/// depend on the thread count.
pub fn sweep_sheets<T, F>(theta_grid: &[T], ratio_grid: &[T], spectrum_at: F) -> Result<SheetGrid<T>, SpectraError>
where
    T: Real,
    F: Fn(T, T) -> Result<Spectrum<T>, SpectraError> + Sync,
{
    check_axis("theta", theta_grid)?;
    check_axis("ratio", ratio_grid)?;
    let columns: Vec<Vec<Spectrum<T>>> = ratio_grid
        .par_iter()
        .map(|&ratio| {
            let mut column: Vec<Spectrum<T>> = Vec::with_capacity(theta_grid.len());
            for &theta in theta_grid {
                let mut spec = spectrum_at(theta, ratio)?;
                if let Some(prev) = column.last() {
                    if prev.len() != spec.len() {
                        return Err(SpectraError::Grid("branch count changed along the sweep".into()));
                    }
                    spec.branch_ids = track_branches(&prev.by_branch(), &spec.eigenvalues);
                }
                column.push(spec);
            }
            Ok(column)
        })
        .collect::<Result<_, SpectraError>>()?;

    let mut points = Vec::with_capacity(theta_grid.len() * ratio_grid.len());
    for (t, &theta) in theta_grid.iter().enumerate() {
        for (r, &ratio) in ratio_grid.iter().enumerate() {
            points.push(SheetPoint {
                theta,
                ratio,
                spectrum: columns[r][t].clone(),
            });
        }
    }
    Ok(SheetGrid {
        theta_axis: theta_grid.to_vec(),
        ratio_axis: ratio_grid.to_vec(),
        points,
    })
}

/// Two-mode sheets with `J = ratio · G` and every other parameter taken from
/// `template`.
pub fn sweep_riemann<T: Real>(
    template: &EffectiveParams<T>,
    theta_grid: &[T],
    ratio_grid: &[T],
) -> Result<SheetGrid<T>, SpectraError> {
    if !(template.g() > T::zero()) {
        return Err(SpectraError::Grid("a J/G sweep needs G > 0".into()));
    }
    if ratio_grid.iter().any(|&r| r < T::zero()) {
        return Err(SpectraError::Grid("J/G must be >= 0".into()));
    }
    sweep_sheets(theta_grid, ratio_grid, |theta, ratio| {
        let p = template.with_theta(theta)?.with_coupling_ratio(ratio)?;
        Ok(eig2_closed(&p))
    })
}
