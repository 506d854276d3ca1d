//! Locating exceptional points in the `(θ, J/G)` plane.

use serde::{Deserialize, Serialize};

use super::{eigengap, ring_eig_circulant, ring_eig_paper, SpectraError, SpectrumSource};
use crate::model::{EffectiveParams, RingParams};
use crate::scalar::Real;

/// Allowed distance of an EP phase from an odd multiple of `π/2`.
pub const PHASE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(n: i64) -> Self {
        if n.rem_euclid(2) == 1 {
            Self::Odd
        } else {
            Self::Even
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Odd => "odd",
            Self::Even => "even",
        }
    }
}

/// Phase-matching index `n` and its parity when `θ = (2n − 1)π/2`.
pub fn classify_parity<T: Real>(theta: T) -> Option<(i64, Parity)> {
    if !theta.is_finite() {
        return None;
    }
    let half_pi = T::FRAC_PI_2();
    let folded = theta - (theta / T::PI()).floor() * T::PI();
    if (folded - half_pi).abs() > T::lit(PHASE_TOLERANCE) {
        return None;
    }
    let n = ((theta / half_pi + T::one()) / T::lit(2.0)).round().to_i64()?;
    Some((n, Parity::of(n)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpRecord<T> {
    pub theta_star: T,
    pub j_over_g: T,
    pub n: i64,
    pub parity: Parity,
    /// Largest eigenvalue separation at the located point.
    pub eigengap: T,
    /// Number of coalescing eigenvalues.
    pub order: u8,
    pub source: SpectrumSource,
}

/// Rectangle in `(θ, J/G)` to search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox<T> {
    pub theta_min: T,
    pub theta_max: T,
    pub ratio_min: T,
    pub ratio_max: T,
}

impl<T: Real> SearchBox<T> {
    pub fn new(theta_min: T, theta_max: T, ratio_min: T, ratio_max: T) -> Result<Self, SpectraError> {
        let b = Self {
            theta_min,
            theta_max,
            ratio_min,
            ratio_max,
        };
        b.validate()?;
        Ok(b)
    }

    /// `θ ∈ [0, 2π]`, `J/G ∈ [0.5, 1.5]`.
    pub fn full_turn() -> Self {
        Self {
            theta_min: T::zero(),
            theta_max: T::PI() + T::PI(),
            ratio_min: T::lit(0.5),
            ratio_max: T::lit(1.5),
        }
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let all_finite = [self.theta_min, self.theta_max, self.ratio_min, self.ratio_max]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(SpectraError::Grid("search box bounds must be finite".into()));
        }
        if !(self.theta_min < self.theta_max) || !(self.ratio_min < self.ratio_max) {
            return Err(SpectraError::Grid("search box bounds must satisfy min < max".into()));
        }
        if self.ratio_min < T::zero() {
            return Err(SpectraError::Grid("J/G lower bound must be >= 0".into()));
        }
        Ok(())
    }
}

/// Grid resolution and acceptance threshold for the EP search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpSearch {
    /// Maximum `θ` step of the coarse scan.
    pub theta_step: f64,
    pub ratio_points: usize,
    /// Accept a candidate when its eigenvalue separation is at most `tolerance · G`.
    pub tolerance: f64,
    pub refine_passes: usize,
}

impl Default for EpSearch {
    fn default() -> Self {
        Self {
            theta_step: std::f64::consts::PI / 64.0,
            ratio_points: 101,
            tolerance: 1e-6,
            refine_passes: 2,
        }
    }
}

/// EPs of the two-mode model within `bx`, sorted by `θ`.
pub fn locate_eps<T: Real>(template: &EffectiveParams<T>, bx: &SearchBox<T>) -> Result<Vec<EpRecord<T>>, SpectraError> {
    locate_eps_with(template, bx, &EpSearch::default())
}

pub fn locate_eps_with<T: Real>(
    template: &EffectiveParams<T>,
    bx: &SearchBox<T>,
    search: &EpSearch,
) -> Result<Vec<EpRecord<T>>, SpectraError> {
    let g = positive_g(template.g())?;
    let gap = |theta: T, ratio: T| {
        template
            .with_theta(theta)
            .and_then(|p| p.with_coupling_ratio(ratio))
            .map(|p| eigengap(&p))
            .unwrap_or_else(|_| T::infinity())
    };
    let found = find_minima(bx, search, g, gap)?;
    Ok(records(found, 2, SpectrumSource::EffectiveClosedForm))
}

/// Points in `bx` where all three ring eigenvalues coincide, using either the
/// circulant diagonalization or the published closed form.
pub fn locate_ring_coalescences<T: Real>(
    template: &RingParams<T>,
    bx: &SearchBox<T>,
    source: SpectrumSource,
    search: &EpSearch,
) -> Result<Vec<EpRecord<T>>, SpectraError> {
    let g = positive_g(template.g())?;
    let eig = match source {
        SpectrumSource::RingCirculant => ring_eig_circulant::<T>,
        SpectrumSource::RingAsPublished => ring_eig_paper::<T>,
        other => {
            return Err(SpectraError::Grid(format!(
                "ring coalescence search needs a ring source, got {}",
                other.as_str()
            )))
        }
    };
    let spread = |theta: T, ratio: T| {
        template
            .with_theta(theta)
            .and_then(|p| p.with_j(ratio * g))
            .map(|p| eig(&p).spread())
            .unwrap_or_else(|_| T::infinity())
    };
    let found = find_minima(bx, search, g, spread)?;
    Ok(records(found, 3, source))
}

fn positive_g<T: Real>(g: T) -> Result<T, SpectraError> {
    if g > T::zero() {
        Ok(g)
    } else {
        Err(SpectraError::Grid("EP search in J/G needs G > 0".into()))
    }
}

fn records<T: Real>(found: Vec<(T, T, T)>, order: u8, source: SpectrumSource) -> Vec<EpRecord<T>> {
    found
        .into_iter()
        .map(|(theta, ratio, gap)| {
            let (n, parity) = classify_parity(theta).unwrap_or_else(|| {
                log::warn!("coalescence at θ = {theta} is off the odd quarter-turn lattice");
                let n = ((theta / T::FRAC_PI_2() + T::one()) / T::lit(2.0))
                    .round()
                    .to_i64()
                    .unwrap_or(0);
                (n, Parity::of(n))
            });
            EpRecord {
                theta_star: theta,
                j_over_g: ratio,
                n,
                parity,
                eigengap: gap,
                order,
                source,
            }
        })
        .collect()
}

fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let last = T::lit((n - 1) as f64);
    (0..n).map(|k| a + (b - a) * T::lit(k as f64) / last).collect()
}

/// Coarse scan for local minima, golden-section polish in `θ` then `J/G`,
/// deduplication, and the acceptance threshold `value ≤ tolerance · scale`.
fn find_minima<T, F>(bx: &SearchBox<T>, search: &EpSearch, scale: T, f: F) -> Result<Vec<(T, T, T)>, SpectraError>
where
    T: Real,
    F: Fn(T, T) -> T,
{
    bx.validate()?;
    if search.ratio_points < 3 || !(search.theta_step > 0.0) || !(search.tolerance > 0.0) {
        return Err(SpectraError::Grid(
            "EP search needs >= 3 ratio points, a positive step and tolerance".into(),
        ));
    }
    let span = (bx.theta_max - bx.theta_min).as_f64();
    let nt = ((span / search.theta_step).ceil() as usize).max(2) + 1;
    let thetas = linspace(bx.theta_min, bx.theta_max, nt);
    let ratios = linspace(bx.ratio_min, bx.ratio_max, search.ratio_points);
    let nr = ratios.len();
    let values: Vec<T> = thetas
        .iter()
        .flat_map(|&t| ratios.iter().map(move |&r| (t, r)))
        .map(|(t, r)| f(t, r))
        .collect();
    let at = |t: usize, r: usize| values[t * nr + r];

    let mut refined: Vec<(T, T, T)> = Vec::new();
    for t in 0..nt {
        for r in 0..nr {
            let v = at(t, r);
            let is_min = (t.saturating_sub(1)..=(t + 1).min(nt - 1))
                .flat_map(|tt| (r.saturating_sub(1)..=(r + 1).min(nr - 1)).map(move |rr| (tt, rr)))
                .all(|(tt, rr)| at(tt, rr) >= v);
            if !is_min {
                continue;
            }
            let (t_lo, t_hi) = (thetas[t.saturating_sub(1)], thetas[(t + 1).min(nt - 1)]);
            let (r_lo, r_hi) = (ratios[r.saturating_sub(1)], ratios[(r + 1).min(nr - 1)]);
            let (mut theta, mut ratio) = (thetas[t], ratios[r]);
            for _ in 0..search.refine_passes {
                theta = golden_section(|x| f(x, ratio), t_lo, t_hi);
                ratio = golden_section(|y| f(theta, y), r_lo, r_hi);
            }
            refined.push((theta, ratio, f(theta, ratio)));
        }
    }

    let dt = thetas[1] - thetas[0];
    let dr = ratios[1] - ratios[0];
    let mut kept: Vec<(T, T, T)> = Vec::new();
    for cand in refined {
        match kept
            .iter_mut()
            .find(|k| (k.0 - cand.0).abs() <= dt && (k.1 - cand.1).abs() <= dr)
        {
            Some(k) if cand.2 < k.2 => *k = cand,
            Some(_) => {}
            None => kept.push(cand),
        }
    }
    let threshold = T::lit(search.tolerance) * scale;
    kept.retain(|k| k.2 <= threshold);
    kept.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(kept)
}

/// Minimizer of a unimodal `f` on `[a, b]`, returning the better of the final
/// bracket ends and interior probes.
fn golden_section<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        let width = (b - a).abs();
        if width <= T::lit(4.0) * T::epsilon() * a.abs().max(b.abs()).max(T::one()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    [a, b, c, d]
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((c, fc), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn parity_lattice() {
        assert_eq!(classify_parity(FRAC_PI_2), Some((1, Parity::Odd)));
        assert_eq!(classify_parity(3.0 * FRAC_PI_2), Some((2, Parity::Even)));
        assert_eq!(classify_parity(5.0 * FRAC_PI_2), Some((3, Parity::Odd)));
        assert_eq!(classify_parity(-FRAC_PI_2), Some((0, Parity::Even)));
        assert_eq!(classify_parity(PI), None);
        assert_eq!(classify_parity(FRAC_PI_2 + 1e-6), None);
        assert_eq!(classify_parity(FRAC_PI_2 + 1e-10), Some((1, Parity::Odd)));
    }

    #[test]
    fn two_eps_per_turn() {
        let p = EffectiveParams::critical(10.0, 1.0, 0.0).unwrap();
        let eps = locate_eps(&p, &SearchBox::full_turn()).unwrap();
        assert_eq!(eps.len(), 2);
        assert!((eps[0].theta_star - FRAC_PI_2).abs() < 1e-9);
        assert!((eps[1].theta_star - 3.0 * FRAC_PI_2).abs() < 1e-9);
        for e in &eps {
            assert!((e.j_over_g - 1.0).abs() < 1e-6);
            assert!(e.eigengap <= 1e-6 * 10.0);
            assert_eq!(e.order, 2);
        }
        assert_eq!(eps[0].parity, Parity::Odd);
        assert_eq!(eps[1].parity, Parity::Even);
    }

    #[test]
    fn half_turn_and_empty_boxes() {
        let p = EffectiveParams::critical(10.0, 1.0, 0.0).unwrap();
        let half = SearchBox::new(0.0, PI, 0.5, 1.5).unwrap();
        assert_eq!(locate_eps(&p, &half).unwrap().len(), 1);
        let none = SearchBox::new(0.0, 1.0, 0.5, 1.5).unwrap();
        assert!(locate_eps(&p, &none).unwrap().is_empty());
        let off = SearchBox::new(0.0, PI, 1.2, 1.5).unwrap();
        assert!(locate_eps(&p, &off).unwrap().is_empty());
        assert!(SearchBox::new(1.0, 0.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn ring_third_order_search() {
        let p = RingParams::new(0.0, 22.0, 10.0, 10.0, 0.0).unwrap();
        let s = EpSearch::default();
        let circ = locate_ring_coalescences(&p, &SearchBox::full_turn(), SpectrumSource::RingCirculant, &s).unwrap();
        assert!(circ.is_empty());
        let publ = locate_ring_coalescences(&p, &SearchBox::full_turn(), SpectrumSource::RingAsPublished, &s).unwrap();
        assert_eq!(publ.len(), 2);
        assert!(publ.iter().all(|e| e.order == 3));
        assert!(locate_ring_coalescences(&p, &SearchBox::full_turn(), SpectrumSource::Numeric, &s).is_err());
    }

    #[test]
    fn golden_section_finds_cusp() {
        let x = golden_section(|x: f64| (x - 0.3).abs().sqrt(), 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-12);
    }
}
