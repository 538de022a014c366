//! The uniform-square example worlds, the assumption table, heat maps and the
//! Monte Carlo consistency harness.
//!
//! The square `[0,1]²` is cut into `n × n` equiprobable cells indexed by
//! `(i, k)`, `i` along `t` and `k` along `c`, each represented by its right
//! endpoints `(i/n, k/n)`. On the grid, the flipped branches become
//! `T₂ = (n + 1 − k)/n` and `C₂ = (n + 1 − i)/n`, which keeps both marginals
//! exactly uniform on `{1/n, …, 1}`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estim::{aalen_johansen, sample_world};
use crate::model::{DiscreteWorld, LatentAtom, WorldFunctionals};
use crate::prodint::prodint_matrix;
use crate::props::{AssumptionReport, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventVar {
    T1,
    T2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CensorVar {
    C1,
    C2,
    C3,
}

/// One example world: resolution and the chosen pair `(Tᵢ, Cⱼ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExampleSpec {
    pub n: usize,
    pub event: EventVar,
    pub censor: CensorVar,
}

pub const PAIRS: [(EventVar, CensorVar); 6] = [
    (EventVar::T1, CensorVar::C1),
    (EventVar::T1, CensorVar::C2),
    (EventVar::T1, CensorVar::C3),
    (EventVar::T2, CensorVar::C1),
    (EventVar::T2, CensorVar::C2),
    (EventVar::T2, CensorVar::C3),
];

/// Pair label such as `T2C1`.
pub fn pair_name(event: EventVar, censor: CensorVar) -> String {
    format!("{event:?}{censor:?}")
}

impl fmt::Display for ExampleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pair_name(self.event, self.censor))
    }
}

/// Parses a pair label such as `T2C1`.
impl FromStr for ExampleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("pair {s:?} is not one of T1C1 … T2C3"));
        let (t, c) = s.split_at_checked(2).ok_or_else(bad)?;
        let event = match t {
            "T1" => EventVar::T1,
            "T2" => EventVar::T2,
            _ => return Err(bad()),
        };
        let censor = match c {
            "C1" => CensorVar::C1,
            "C2" => CensorVar::C2,
            "C3" => CensorVar::C3,
            _ => return Err(bad()),
        };
        Ok(Self { n: 0, event, censor })
    }
}

fn check_resolution(n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        Err(Error::BadResolution(n))
    } else {
        Ok(())
    }
}

/// Grid values of `T` and `C` in cell `(i, k)`, both in `1..=n`.
pub fn cell_values(n: usize, event: EventVar, censor: CensorVar, i: usize, k: usize) -> (usize, usize) {
    let half = n / 2;
    let t = match event {
        EventVar::T1 => i,
        EventVar::T2 if i > half && k <= half => n + 1 - k,
        EventVar::T2 => i,
    };
    let c = match censor {
        CensorVar::C1 => k,
        CensorVar::C2 if i <= half && k > half => n + 1 - i,
        CensorVar::C2 => k,
        CensorVar::C3 if k < i => k,
        CensorVar::C3 => n,
    };
    (t, c)
}

/// The grid `{1/n, …, 1}`.
pub fn example_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

/// Enumerates the `n²` cells with mass `1/n²` each; one event type.
pub fn build_example_world(spec: ExampleSpec) -> Result<DiscreteWorld> {
    let n = spec.n;
    check_resolution(n)?;
    let grid = example_grid(n);
    let p = 1.0 / (n * n) as f64;
    let mut atoms = Vec::with_capacity(n * n);
    for i in 1..=n {
        for k in 1..=n {
            let (t, c) = cell_values(n, spec.event, spec.censor, i, k);
            atoms.push(LatentAtom { t: grid[t - 1], cause: 1, c: grid[c - 1], p });
        }
    }
    DiscreteWorld::full(1, grid, atoms)
}

/// The defining surfaces on the continuous square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    T1,
    T2,
    C1,
    C2,
    C3,
    Exit,
}

impl Surface {
    pub const ALL: [Surface; 6] = [Surface::T1, Surface::T2, Surface::C1, Surface::C2, Surface::C3, Surface::Exit];

    pub fn name(self) -> &'static str {
        match self {
            Surface::T1 => "T1",
            Surface::T2 => "T2",
            Surface::C1 => "C1",
            Surface::C2 => "C2",
            Surface::C3 => "C3",
            Surface::Exit => "Ttilde",
        }
    }
}

/// Value of a surface at the point `(t, c)` of the unit square.
pub fn eval_continuous(surface: Surface, t: f64, c: f64) -> f64 {
    match surface {
        Surface::T1 => t,
        Surface::T2 if (0.5..=1.0).contains(&t) && (0.0..0.5).contains(&c) => 1.0 - c,
        Surface::T2 => t,
        Surface::C1 => c,
        Surface::C2 if (0.0..=0.5).contains(&t) && (0.5..=1.0).contains(&c) => 1.0 - t,
        Surface::C2 => c,
        Surface::C3 if c < t => c,
        Surface::C3 => 1.0,
        Surface::Exit => t.min(c),
    }
}

/// `n × n` values of a surface at the cell representatives; row `k` is
/// `c = (k+1)/n`, column `i` is `t = (i+1)/n`.
pub fn heatmap(surface: Surface, n: usize) -> Vec<Vec<f64>> {
    let g = example_grid(n);
    g.iter().map(|&c| g.iter().map(|&t| eval_continuous(surface, t, c)).collect()).collect()
}

/// Writes `heatmap_<var>.csv` for all six surfaces into `dir`, plus
/// `heatmap_<var>.pgm` when `pgm` is set. Returns the paths written.
pub fn emit_heatmaps(n: usize, dir: &Path, pgm: bool) -> Result<Vec<PathBuf>> {
    check_resolution(n)?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in Surface::ALL {
        let grid = heatmap(s, n);
        let path = dir.join(format!("heatmap_{}.csv", s.name()));
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        for row in &grid {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        written.push(path);
        if pgm {
            let path = dir.join(format!("heatmap_{}.pgm", s.name()));
            let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(out, "P2\n{n} {n}\n255")?;
            // image rows run from c = 1 at the top down to c = 1/n
            for row in grid.iter().rev() {
                let line: Vec<String> = row.iter().map(|v| ((v * 255.0).round() as u8).to_string()).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
            out.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

pub const TABLE1_ROWS: [&str; 6] = [
    "identifiability",
    "representativity",
    "cens_identifiability",
    "cens_representativity",
    "pointwise_independence",
    "full_independence",
];

/// The published pattern, rows as [`TABLE1_ROWS`] and columns as [`PAIRS`].
pub const TABLE1_EXPECTED: [[bool; 6]; 6] = [
    [true, true, true, true, true, true],
    [true, true, true, false, false, false],
    [true, true, false, true, true, false],
    [true, false, false, true, false, false],
    [true, true, false, true, true, false],
    [true, false, false, false, false, false],
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Cell {
    pub holds: bool,
    /// Largest defect among the family's forms.
    pub defect: f64,
    /// Smallest defect among the family's forms.
    pub min_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Result {
    pub n: usize,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Table1Cell>>,
}

impl Table1Result {
    pub fn pattern(&self) -> [[bool; 6]; 6] {
        let mut p = [[false; 6]; 6];
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                p[r][c] = cell.holds;
            }
        }
        p
    }

    pub fn matches_published(&self) -> bool {
        self.pattern() == TABLE1_EXPECTED
    }

    /// Columns `assumption`, one 0/1 column per pair, then one defect column per pair.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["assumption".to_string()];
        header.extend(self.columns.iter().cloned());
        header.extend(self.columns.iter().map(|c| format!("defect_{c}")));
        w.write_record(&header).map_err(io)?;
        for (name, row) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|c| if c.holds { "1".to_string() } else { "0".to_string() }));
            rec.extend(row.iter().map(|c| format!("{:e}", c.defect)));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every checker on the six example worlds at resolution `n`.
pub fn reproduce_table1(n: usize) -> Result<Table1Result> {
    check_resolution(n)?;
    let reports: Vec<AssumptionReport> = PAIRS
        .par_iter()
        .map(|&(event, censor)| {
            let f = build_example_world(ExampleSpec { n, event, censor })?.derive()?;
            AssumptionReport::build(&f, DEFAULT_TOLERANCE)
        })
        .collect::<Result<_>>()?;
    let cells = TABLE1_ROWS
        .iter()
        .map(|row| {
            reports
                .iter()
                .map(|r| {
                    let fam = r.family(row).expect("every row is a family");
                    let min_defect = r
                        .properties
                        .iter()
                        .filter(|p| p.family == *row)
                        .filter_map(|p| p.defect)
                        .fold(f64::INFINITY, f64::min);
                    Table1Cell {
                        holds: fam.holds.unwrap_or(false),
                        defect: fam.defect.unwrap_or(f64::NAN),
                        min_defect,
                    }
                })
                .collect()
        })
        .collect();
    Ok(Table1Result {
        n,
        columns: PAIRS.iter().map(|&(e, c)| pair_name(e, c)).collect(),
        rows: TABLE1_ROWS.iter().map(|r| r.to_string()).collect(),
        cells,
    })
}

/// Grid analogs of `P(T₂ ≤ 1−s | T̃ = s, D̃ = 0)` and `P(T₂ ≤ 1−s | T₂ > s)`.
///
/// On the grid `1 − s` becomes the flipped value `(n + 1 − k)/n` of a cell
/// censored at `s = k/n`.
pub fn t2_anchor(n: usize, s: f64) -> Result<(f64, f64)> {
    let f = build_example_world(ExampleSpec { n, event: EventVar::T2, censor: CensorVar::C1 })?.derive()?;
    let k = f.slot_of(s);
    if f.times()[k] != s || k == 0 || 2 * k > n {
        return Err(Error::InvalidAtom { time: s, reason: "needs a grid point in (0, 1/2]".into() });
    }
    let t = n + 1 - k;
    let given_censored = f.prob(|a| a.exit == k && a.status == 0 && a.t <= t) / f.prob(|a| a.exit == k && a.status == 0);
    let given_alive = f.prob(|a| a.t > k && a.t <= t) / f.prob(|a| a.t > k);
    Ok((given_censored, given_alive))
}

/// Cumulative hazards of `C₃` and `H̃₀` at every grid point below one.
pub fn c3_hazard_gap(n: usize) -> Result<Vec<(f64, f64, f64)>> {
    let f = build_example_world(ExampleSpec { n, event: EventVar::T1, censor: CensorVar::C3 })?.derive()?;
    let l = f.latent()?;
    let o = f.observed();
    let (mut hc, mut h0) = (0.0, 0.0);
    let mut out = Vec::new();
    for k in 1..n {
        hc += l.cens_hazard[k];
        h0 += o.hazard[0][k];
        out.push((f.times()[k], hc, h0));
    }
    Ok(out)
}

/// One replicate of the consistency experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub world: String,
    pub n: usize,
    pub seed: u64,
    /// `truth` when the identity of forces holds, otherwise `observed_limit`.
    pub target: String,
    pub sup_error_s: f64,
    pub sup_error_p: f64,
    /// Against `(S, F_j)` regardless of the target; `NaN` without a latent law.
    pub sup_error_truth_p: f64,
}

/// First rows of the truth and of `∏(I + dH̃)` at each grid point of `𝒥`.
struct Targets {
    times: Vec<f64>,
    truth: Option<Vec<Vec<f64>>>,
    limit: Vec<Vec<f64>>,
    identifiable: bool,
}

fn targets(f: &WorldFunctionals) -> Result<Targets> {
    let h = f.observed_hazard_matrix();
    let times: Vec<f64> = f.j_slots().map(|k| f.times()[k]).collect();
    let limit = times
        .iter()
        .map(|&t| Ok(prodint_matrix(&h, 0.0, t)?.first_row().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let (truth, identifiable) = if f.is_observed_only() {
        (None, false)
    } else {
        let truth = times
            .iter()
            .map(|&t| Ok(f.truth_matrix(t)?.first_row().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let ok = crate::props::check_identity_of_forces(f)?.holds(DEFAULT_TOLERANCE);
        (Some(truth), ok)
    };
    Ok(Targets { times, truth, limit, identifiable })
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>], cols: std::ops::Range<usize>) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| cols.clone().map(move |c| (x[c] - y[c]).abs()))
        .fold(0.0, f64::max)
}

/// `sup_t |P̂(t) − P(t)|` over `𝒥` between the limit `∏(I + dH̃)` and `(S, F_j)`.
pub fn limit_gap(f: &WorldFunctionals) -> Result<f64> {
    let t = targets(f)?;
    let truth = t.truth.ok_or(Error::ObservedOnly)?;
    Ok(sup_diff(&t.limit, &truth, 0..f.d() + 1))
}

/// Samples `n` observations per seed and measures the sup error of
/// Kaplan–Meier and of the first Aalen–Johansen row over the grid points of
/// `𝒥`, runs in parallel over `(n, seed)`.
pub fn consistency_experiment(
    name: &str,
    f: &WorldFunctionals,
    n_values: &[usize],
    seeds: &[u64],
) -> Result<Vec<ConsistencyRow>> {
    let tg = targets(f)?;
    let target = match (&tg.truth, tg.identifiable) {
        (Some(t), true) => t,
        _ => &tg.limit,
    };
    let label = if tg.identifiable { "truth" } else { "observed_limit" };
    let jobs: Vec<(usize, u64)> = n_values.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    jobs.par_iter()
        .map(|&(n, seed)| {
            let path = aalen_johansen(&sample_world(f, n, seed))?;
            let est: Vec<Vec<f64>> = tg.times.iter().map(|&t| path.first_row_at(t)).collect();
            let km: Vec<Vec<f64>> = tg.times.iter().map(|&t| vec![path.km_at(t)]).collect();
            let target_s: Vec<Vec<f64>> = target.iter().map(|r| vec![r[0]]).collect();
            Ok(ConsistencyRow {
                world: name.to_string(),
                n,
                seed,
                target: label.to_string(),
                sup_error_s: sup_diff(&km, &target_s, 0..1),
                sup_error_p: sup_diff(&est, target, 0..f.d() + 1),
                sup_error_truth_p: tg.truth.as_ref().map_or(f64::NAN, |t| sup_diff(&est, t, 0..f.d() + 1)),
            })
        })
        .collect()
}

/// CSV with columns `world, n, seed, target, sup_error_S, sup_error_P, sup_error_truth_P`.
pub fn write_consistency_csv<W: Write>(rows: &[ConsistencyRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["world", "n", "seed", "target", "sup_error_S", "sup_error_P", "sup_error_truth_P"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.world.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.target.clone(),
            r.sup_error_s.to_string(),
            r.sup_error_p.to_string(),
            r.sup_error_truth_p.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// A world where censoring at the first grid point only removes late
/// failures, so the observed hazards overstate the risk at the second.
pub fn dependent_counterexample() -> DiscreteWorld {
    let inf = f64::INFINITY;
    let atoms = [(1.0, 1, inf, 0.3), (3.0, 1, 1.0, 0.4), (2.0, 1, inf, 0.3)]
        .iter()
        .map(|&(t, cause, c, p)| LatentAtom { t, cause, c, p })
        .collect();
    DiscreteWorld::full(1, vec![1.0, 2.0, 3.0], atoms).expect("valid world")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, pair: &str) -> ExampleSpec {
        ExampleSpec { n, ..pair.parse().unwrap() }
    }

    #[test]
    fn resolution_is_checked() {
        assert_eq!(build_example_world(spec(5, "T1C1")), Err(Error::BadResolution(5)));
        assert_eq!(build_example_world(spec(2, "T1C1")), Err(Error::BadResolution(2)));
        assert!("T3C1".parse::<ExampleSpec>().is_err());
    }

    #[test]
    fn first_exit_mass_by_count() {
        let f = build_example_world(spec(4, "T1C1")).unwrap().derive().unwrap();
        // cells with min(i, k) = 1: 7 of 16
        let p: f64 = (0..=1).map(|j| f.observed().exit_mass[j][1]).sum();
        assert!((p - 7.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn marginals_are_uniform() {
        for n in [4, 8, 16] {
            for (e, c) in PAIRS {
                let mut tcount = vec![0; n + 1];
                let mut ccount = vec![0; n + 1];
                for i in 1..=n {
                    for k in 1..=n {
                        let (t, cv) = cell_values(n, e, c, i, k);
                        tcount[t] += 1;
                        ccount[cv] += 1;
                    }
                }
                assert!(tcount[1..].iter().all(|&x| x == n));
                if c != CensorVar::C3 {
                    assert!(ccount[1..].iter().all(|&x| x == n));
                }
            }
        }
    }

    #[test]
    fn all_pairs_share_the_observed_law() {
        for n in [4, 8] {
            let reference = build_example_world(spec(n, "T1C1")).unwrap().observed_law();
            for (e, c) in PAIRS {
                let law = build_example_world(ExampleSpec { n, event: e, censor: c }).unwrap().observed_law();
                assert_eq!(law.len(), reference.len());
                for (a, b) in law.iter().zip(&reference) {
                    assert!(a.t == b.t && a.status == b.status && (a.p - b.p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn surfaces_at_named_points() {
        assert_eq!(eval_continuous(Surface::Exit, 0.75, 0.25), 0.25);
        assert_eq!(eval_continuous(Surface::T2, 0.75, 0.25), 0.75);
        assert_eq!(eval_continuous(Surface::C3, 0.5, 0.75), 1.0);
        assert_eq!(heatmap(Surface::Exit, 4)[0][2], 0.25);
    }

    #[test]
    fn t2_anchor_at_a_quarter() {
        for n in [8, 16] {
            let (a, b) = t2_anchor(n, 0.25).unwrap();
            let k = n / 4;
            assert!((a - 1.0).abs() < 1e-12);
            assert!((b - (n + 1 - 2 * k) as f64 / (n - k) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn c3_hazard_is_strictly_below_after_the_first_point() {
        let gap = c3_hazard_gap(8).unwrap();
        assert!((gap[0].1 - gap[0].2).abs() < 1e-15);
        for &(_, hc, h0) in &gap[1..] {
            assert!(hc < h0 - 1e-6);
        }
    }

    #[test]
    fn table1_pattern_at_eight() {
        let t = reproduce_table1(8).unwrap();
        for (name, row) in t.rows.iter().zip(&t.cells) {
            let line: Vec<String> = row.iter().map(|c| format!("{}:{:.2e}/{:.2e}", c.holds as u8, c.defect, c.min_defect)).collect();
            eprintln!("{name:24} {}", line.join(" "));
        }
        assert!(t.matches_published());
    }
}
