//! Product integrals of pure-jump integrators.
//!
//! For an atomic integrator the product integral over (s, t] is the finite,
//! time-ordered product of `(I + ΔH(u))` over the atoms `u` in the window.
//! The competing-risks hazard matrix only has a nonzero first row, so every
//! product keeps rows `2..=d+1` equal to identity rows.

use std::fmt;

use crate::error::{Error, Result};
use crate::stepfn::AtomicMeasure;

/// Slack allowed on `ΔH ≤ 1` for increments computed as ratios of sums.
pub const MASS_SLACK: f64 = 1e-12;

fn check_mass(time: f64, mass: f64) -> Result<()> {
    if mass > 1.0 + MASS_SLACK {
        Err(Error::MassExceedsOne { time, mass })
    } else {
        Ok(())
    }
}

/// Increments of the `(d+1)×(d+1)` cumulative hazard matrix whose first row is
/// `(−H, H_1, …, H_d)` and whose other rows vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardMatrix {
    d: usize,
    atoms: Vec<(f64, Vec<f64>)>,
}

impl HazardMatrix {
    /// Atoms are `(time, [ΔH_1, …, ΔH_d])`; simultaneous atoms are fused.
    pub fn new(d: usize, atoms: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        let mut atoms = atoms;
        for (t, inc) in &atoms {
            if inc.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: inc.len(),
                });
            }
            if !t.is_finite() || *t <= 0.0 {
                return Err(Error::InvalidAtom {
                    time: *t,
                    reason: "hazard atoms need finite positive times".into(),
                });
            }
            if inc.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidAtom {
                    time: *t,
                    reason: "cause-specific increments must be finite and nonnegative".into(),
                });
            }
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut fused: Vec<(f64, Vec<f64>)> = Vec::with_capacity(atoms.len());
        for (t, inc) in atoms {
            match fused.last_mut() {
                Some(last) if last.0 == t => {
                    for (a, b) in last.1.iter_mut().zip(&inc) {
                        *a += b;
                    }
                }
                _ => fused.push((t, inc)),
            }
        }
        for (t, inc) in &fused {
            check_mass(*t, inc.iter().sum())?;
        }
        Ok(Self { d, atoms: fused })
    }

    /// Stacks `d` cause-specific hazard measures into one hazard matrix.
    pub fn from_measures(measures: &[AtomicMeasure]) -> Result<Self> {
        let d = measures.len();
        let mut atoms: Vec<(f64, Vec<f64>)> = Vec::new();
        for (j, m) in measures.iter().enumerate() {
            for &(t, mass) in m.atoms() {
                let mut inc = vec![0.0; d];
                inc[j] = mass;
                atoms.push((t, inc));
            }
        }
        Self::new(d, atoms)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[(f64, Vec<f64>)] {
        &self.atoms
    }

    pub fn window(&self, s: f64, t: f64) -> &[(f64, Vec<f64>)] {
        let lo = self.atoms.partition_point(|a| a.0 <= s);
        let hi = self.atoms.partition_point(|a| a.0 <= t);
        if lo >= hi {
            &[]
        } else {
            &self.atoms[lo..hi]
        }
    }

    /// All-cause increment measure `ΔH = Σ_j ΔH_j`.
    pub fn total(&self) -> AtomicMeasure {
        let times: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        let masses: Vec<f64> = self.atoms.iter().map(|a| a.1.iter().sum()).collect();
        AtomicMeasure::on_grid(&times, &masses)
    }

    /// The `(d+1)×(d+1)` increment matrix `ΔH(u)` at atom `k`.
    fn increment_matrix(&self, k: usize) -> TransitionMatrix {
        let (_, inc) = &self.atoms[k];
        let n = self.d + 1;
        let mut m = TransitionMatrix::zeros(n);
        m.set(0, 0, -inc.iter().sum::<f64>());
        for (j, x) in inc.iter().enumerate() {
            m.set(0, j + 1, *x);
        }
        m
    }
}

/// A dense square matrix; used for transition matrices `P(s, t)`.
#[derive(Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.n).collect();
        f.debug_struct("TransitionMatrix").field("rows", &rows).finish()
    }
}

impl TransitionMatrix {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Matrix with identity rows below a given first row.
    pub fn from_first_row(row: &[f64]) -> Self {
        let mut m = Self::identity(row.len());
        m.data[..row.len()].copy_from_slice(row);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    /// First row: `(S(t|s), F_1(t|s), …, F_d(t|s))`.
    pub fn first_row(&self) -> &[f64] {
        self.row(0)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    fn add_identity(mut self) -> Self {
        for i in 0..self.n {
            self.data[i * self.n + i] += 1.0;
        }
        self
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of: lower rows are identity rows, first-row entries
    /// lie in [0, 1], and the first row sums to one.
    pub fn stochastic_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 1..self.n {
            for c in 0..self.n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((self.get(r, c) - target).abs());
            }
        }
        for &x in self.first_row() {
            worst = worst.max((-x).max(x - 1.0).max(0.0));
        }
        let sum: f64 = self.first_row().iter().sum();
        worst.max((sum - 1.0).abs())
    }
}

/// `∏_{u ∈ (s, t]} (1 − Δh(u))`; the empty product is one.
pub fn prodint_scalar(h: &AtomicMeasure, s: f64, t: f64) -> Result<f64> {
    if s > t {
        return Err(Error::InvalidWindow { a: s, b: t });
    }
    let mut p = 1.0;
    for &(u, mass) in h.window(s, t) {
        check_mass(u, mass)?;
        p *= 1.0 - mass;
    }
    Ok(p)
}

/// `∏_{u ∈ (s, t]} (I + ΔH(u))`, multiplied left to right in time order.
pub fn prodint_matrix(h: &HazardMatrix, s: f64, t: f64) -> Result<TransitionMatrix> {
    if s > t {
        return Err(Error::InvalidWindow { a: s, b: t });
    }
    let lo = h.atoms.partition_point(|a| a.0 <= s);
    let hi = h.atoms.partition_point(|a| a.0 <= t);
    let mut p = TransitionMatrix::identity(h.d + 1);
    for k in lo..hi.max(lo) {
        p = p.mul(&h.increment_matrix(k).add_identity());
    }
    Ok(p)
}

/// Solves the forward equation `B(s,t) − I = ∫_s^t B(s,u−) H(du)` through its
/// first-row form: `β_{1,j+1}(t) = Σ_{u ∈ (s,t]} β_{1,1}(u−) ΔH_j(u)` and
/// `β_{1,1} = 1 − Σ_j β_{1,j+1}`, lower rows fixed at identity.
pub fn forward_solve(h: &HazardMatrix, s: f64, horizon: f64) -> Result<TransitionMatrix> {
    if s > horizon {
        return Err(Error::InvalidWindow { a: s, b: horizon });
    }
    let d = h.d;
    let mut absorbed = vec![0.0; d];
    let mut stay = 1.0;
    for (u, inc) in h.window(s, horizon) {
        check_mass(*u, inc.iter().sum())?;
        for (b, x) in absorbed.iter_mut().zip(inc) {
            *b += stay * x;
        }
        stay = 1.0 - absorbed.iter().sum::<f64>();
    }
    let mut row = Vec::with_capacity(d + 1);
    row.push(stay);
    row.extend(absorbed);
    Ok(TransitionMatrix::from_first_row(&row))
}

/// Defect of the Duhamel equation for two scalar integrators on (s, t]:
///
/// `|∏(1−dA) − ∏(1−dB) − Σ_u ∏_{(u,t]}(1−dA) (ΔB − ΔA)(u) ∏_{(s,u)}(1−dB)|`.
///
/// Each product on the right is recomputed from scratch, so the check does
/// not share a recursion with [`prodint_scalar`].
pub fn duhamel_defect(a: &AtomicMeasure, b: &AtomicMeasure, s: f64, t: f64) -> Result<f64> {
    if s > t {
        return Err(Error::InvalidWindow { a: s, b: t });
    }
    let mut times: Vec<f64> = a.window(s, t).iter().chain(b.window(s, t)).map(|x| x.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let da: Vec<f64> = times.iter().map(|&u| a.mass_at(u)).collect();
    let db: Vec<f64> = times.iter().map(|&u| b.mass_at(u)).collect();
    for (k, &u) in times.iter().enumerate() {
        check_mass(u, da[k])?;
        check_mass(u, db[k])?;
    }
    let lhs = prodint_scalar(a, s, t)? - prodint_scalar(b, s, t)?;
    let mut rhs = 0.0;
    for k in 0..times.len() {
        let after: f64 = da[k + 1..].iter().map(|x| 1.0 - x).product();
        let before: f64 = db[..k].iter().map(|x| 1.0 - x).product();
        rhs += after * (db[k] - da[k]) * before;
    }
    Ok((lhs - rhs).abs())
}

/// Recovers hazard increments from a path of transition matrices
/// `P(0, t_k)` at successive times, via
/// `ΔH_j(t_k) = (P_{1,j+1}(t_k) − P_{1,j+1}(t_{k−1})) / P_{1,1}(t_{k−1})`.
///
/// Only meaningful while `P_{1,1} > 0`; later points are skipped.
pub fn increments_from_path(path: &[(f64, TransitionMatrix)]) -> Result<HazardMatrix> {
    let Some((_, first)) = path.first() else {
        return Err(Error::InvalidWorld("empty transition path".into()));
    };
    let n = first.dim();
    let mut prev = TransitionMatrix::identity(n);
    let mut atoms = Vec::new();
    for (t, p) in path {
        let stay = prev.get(0, 0);
        if stay <= 0.0 {
            break;
        }
        let inc: Vec<f64> = (1..n)
            .map(|j| ((p.get(0, j) - prev.get(0, j)) / stay).max(0.0))
            .collect();
        atoms.push((*t, inc));
        prev = p.clone();
    }
    HazardMatrix::new(n - 1, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(prodint_scalar(&m(&[(1.0, 0.5)]), 0.0, 2.0).unwrap(), 0.5);
        assert_eq!(prodint_scalar(&m(&[(1.0, 0.5)]), 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(prodint_scalar(&m(&[(1.0, 0.5), (2.0, 0.5)]), 0.0, 2.0).unwrap(), 0.25);
        assert!(matches!(
            prodint_scalar(&m(&[(1.0, 1.5)]), 0.0, 2.0),
            Err(Error::MassExceedsOne { .. })
        ));
    }

    #[test]
    fn matrix_examples() {
        let h = HazardMatrix::new(1, vec![(1.0, vec![0.3])]).unwrap();
        let p = prodint_matrix(&h, 0.0, 1.0).unwrap();
        assert!((p.get(0, 0) - 0.7).abs() < 1e-15);
        assert_eq!(p.get(0, 1), 0.3);

        let empty = HazardMatrix::new(2, vec![]).unwrap();
        assert_eq!(prodint_matrix(&empty, 0.0, 5.0).unwrap(), TransitionMatrix::identity(3));
        assert_eq!(forward_solve(&empty, 0.0, 5.0).unwrap(), TransitionMatrix::identity(3));

        // Hand product: (0.7, 0.2, 0.1) then stay·(0.5, 0.5, 0) -> (0.35, 0.55, 0.1).
        let h = HazardMatrix::new(2, vec![(1.0, vec![0.2, 0.1]), (2.0, vec![0.5, 0.0])]).unwrap();
        let p = prodint_matrix(&h, 0.0, 2.0).unwrap();
        let expected = [0.35, 0.55, 0.1];
        for (x, e) in p.first_row().iter().zip(expected) {
            assert!((x - e).abs() < 1e-15, "{p:?}");
        }
        assert!(p.stochastic_defect() < 1e-15);
    }

    #[test]
    fn forward_examples() {
        let h = HazardMatrix::new(1, vec![(1.0, vec![0.2]), (2.0, vec![0.3])]).unwrap();
        let b = forward_solve(&h, 0.0, 2.0).unwrap();
        assert!((b.get(0, 0) - 0.8 * 0.7).abs() < 1e-15);
        assert!(matches!(
            HazardMatrix::new(2, vec![(1.0, vec![0.7, 0.4])]),
            Err(Error::MassExceedsOne { .. })
        ));
    }

    #[test]
    fn duhamel_examples() {
        let a = m(&[(1.0, 0.3), (2.0, 0.6)]);
        assert_eq!(duhamel_defect(&a, &a, 0.0, 3.0).unwrap(), 0.0);
        let b = m(&[(1.0, 0.5)]);
        assert_eq!(duhamel_defect(&AtomicMeasure::empty(), &b, 0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn simultaneous_atoms_are_fused() {
        let h = HazardMatrix::new(2, vec![(1.0, vec![0.1, 0.0]), (1.0, vec![0.0, 0.2])]).unwrap();
        assert_eq!(h.atoms(), &[(1.0, vec![0.1, 0.2])]);
    }

    fn hazard_strategy(d: usize) -> impl Strategy<Value = HazardMatrix> {
        prop::collection::vec((1u32..30, prop::collection::vec(0.0f64..1.0, d), 0.0f64..1.0), 0..12)
            .prop_map(move |atoms| {
                let atoms = atoms
                    .into_iter()
                    .map(|(t, w, scale)| {
                        let total: f64 = w.iter().sum::<f64>().max(1e-9);
                        (t as f64, w.iter().map(|x| x / total * scale).collect())
                    })
                    .collect::<Vec<(f64, Vec<f64>)>>();
                // fuse by time first so that sums stay below one
                let mut by_time: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
                for (t, inc) in atoms {
                    by_time.entry(t.to_bits()).or_insert(inc);
                }
                HazardMatrix::new(d, by_time.into_iter().map(|(t, v)| (f64::from_bits(t), v)).collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn matrix_multiplicativity(h in hazard_strategy(3), a in 0u32..31, b in 0u32..31, c in 0u32..31) {
            let mut w = [a as f64, b as f64, c as f64];
            w.sort_by(f64::total_cmp);
            let whole = prodint_matrix(&h, w[0], w[2]).unwrap();
            let split = prodint_matrix(&h, w[0], w[1]).unwrap().mul(&prodint_matrix(&h, w[1], w[2]).unwrap());
            prop_assert!(whole.max_abs_diff(&split) < 1e-12);
        }

        #[test]
        fn scalar_multiplicativity(h in hazard_strategy(1), a in 0u32..31, b in 0u32..31, c in 0u32..31) {
            let mut w = [a as f64, b as f64, c as f64];
            w.sort_by(f64::total_cmp);
            let tot = h.total();
            let whole = prodint_scalar(&tot, w[0], w[2]).unwrap();
            let split = prodint_scalar(&tot, w[0], w[1]).unwrap() * prodint_scalar(&tot, w[1], w[2]).unwrap();
            prop_assert!((whole - split).abs() < 1e-12);
        }

        #[test]
        fn rows_stay_stochastic(h in hazard_strategy(2)) {
            let p = prodint_matrix(&h, 0.0, 100.0).unwrap();
            prop_assert!(p.stochastic_defect() < 1e-12);
            let b = forward_solve(&h, 0.0, 100.0).unwrap();
            prop_assert!(p.max_abs_diff(&b) < 1e-12);
        }

        #[test]
        fn positive_below_one(h in hazard_strategy(1)) {
            let tot = h.total();
            prop_assume!(tot.atoms().iter().all(|a| a.1 < 1.0));
            prop_assert!(prodint_scalar(&tot, 0.0, 100.0).unwrap() > 0.0);
        }

        #[test]
        fn complementary_combination(a in prop::collection::vec(0.0f64..1.0, 1..10), b in prop::collection::vec(0.0f64..1.0, 1..10)) {
            let n = a.len().min(b.len());
            let times: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            let ma = AtomicMeasure::on_grid(&times, &a[..n]);
            let mb = AtomicMeasure::on_grid(&times, &b[..n]);
            let combined: Vec<f64> = (0..n).map(|k| a[k] + b[k] - a[k] * b[k]).collect();
            let mc = AtomicMeasure::on_grid(&times, &combined);
            let lhs = prodint_scalar(&mc, 0.0, n as f64).unwrap();
            let rhs = prodint_scalar(&ma, 0.0, n as f64).unwrap() * prodint_scalar(&mb, 0.0, n as f64).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn increments_recoverable(h in hazard_strategy(2)) {
            let path: Vec<(f64, TransitionMatrix)> = h.atoms().iter()
                .map(|(t, _)| (*t, prodint_matrix(&h, 0.0, *t).unwrap()))
                .collect();
            prop_assume!(!path.is_empty());
            let back = increments_from_path(&path).unwrap();
            // the division by P_11 amplifies rounding once few remain at risk
            let mut stay = 1.0;
            for (((t0, a), (t1, b)), (_, p)) in h.atoms().iter().zip(back.atoms()).zip(&path) {
                prop_assert_eq!(t0, t1);
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-12 / stay, "{} vs {} with {} at risk", x, y, stay);
                }
                stay = p.get(0, 0);
            }
        }
    }
}
