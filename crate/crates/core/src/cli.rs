//! Sweeps, oracle verification and output formatting behind the
//! `unruh-gauss` binary.
//!
//! Everything here is deterministic: grid points are generated by
//! multiplication rather than accumulation, rows are assembled in
//! `(s, r, partition)` order regardless of how they were evaluated, and
//! floats are written with Rust's locale-free formatting.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::entanglement::{log_negativity, purity, Partition};
use crate::error::{Error, Result};
use crate::fock::{
    build_state_fock, covariance_from_state, log_negativity_fock, reduced_density, truncation_tail,
    ORACLE_TAIL_LIMIT,
};
use crate::symplectic::{build_scenario_state, marginal, ScenarioParams};

pub const CSV_HEADER: &str = "s,r,partition,lambda_min,e_n,separable,purity";

/// Conventions echoed at the top of every CSV file.
pub const CONVENTIONS: &str =
    "conventions: hbar = 1, a = (q + ip)/sqrt(2), vacuum variance 1/2, e_n in natural-log units";

/// Oracle tolerances for covariance entries and logarithmic negativity.
pub const COV_TOL: f64 = 1e-6;
pub const EN_TOL: f64 = 1e-4;

const MAX_ROWS: usize = 10_000_000;

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    s_values: Vec<f64>,
    r_min: f64,
    r_max: f64,
    r_step: f64,
    partitions: Vec<Partition>,
}

impl SweepSpec {
    /// An empty partition list selects all three single-mode bipartitions.
    pub fn new(
        s_values: Vec<f64>,
        r_min: f64,
        r_max: f64,
        r_step: f64,
        partitions: Vec<Partition>,
    ) -> Result<Self> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if s_values.is_empty() {
            return bad("s", f64::NAN, "at least one s value is required");
        }
        for &s in &s_values {
            ScenarioParams::new(s, 0.0)?;
        }
        ScenarioParams::new(0.0, r_min)?;
        ScenarioParams::new(0.0, r_max)?;
        if !(r_step > 0.0 && r_step.is_finite()) {
            return bad("r_step", r_step, "must be positive and finite");
        }
        if r_min > r_max {
            return bad("r_min", r_min, "must not exceed r_max");
        }
        let partitions = if partitions.is_empty() {
            Partition::all_pairs().to_vec()
        } else {
            partitions
        };
        if let Some(p) = partitions
            .iter()
            .find(|p| p.left().len() != 1 || p.right().len() != 1)
        {
            return Err(Error::InvalidPartition(format!(
                "{p}: only one mode per side is supported"
            )));
        }
        let spec = Self {
            s_values,
            r_min,
            r_max,
            r_step,
            partitions,
        };
        let rows =
            spec.r_count() as f64 * spec.s_values.len() as f64 * spec.partitions.len() as f64;
        if rows > MAX_ROWS as f64 {
            return bad("r_step", r_step, "sweep would exceed 10^7 rows");
        }
        Ok(spec)
    }

    /// Fixed spec for the entanglement-versus-acceleration figure:
    /// `s ∈ {0.5, 1.0, 1.5}`, `r ∈ [0, 3]` in steps of 0.05, partition A|I.
    /// The three `s` values are illustrative choices.
    pub fn figure2() -> Self {
        Self::new(vec![0.5, 1.0, 1.5], 0.0, 3.0, 0.05, vec![Partition::a_i()])
            .expect("built-in spec is valid")
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    fn r_count(&self) -> usize {
        ((self.r_max - self.r_min) / self.r_step + 1e-9).floor() as usize + 1
    }

    /// `r_min + k·r_step` for every `k` that stays within `r_max`.
    pub fn r_values(&self) -> Vec<f64> {
        (0..self.r_count())
            .map(|k| self.r_min + k as f64 * self.r_step)
            .map(|r| r.min(self.r_max))
            .collect()
    }

    /// Comment lines echoing the spec, without the leading `#`.
    pub fn describe(&self) -> Vec<String> {
        let list = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        vec![
            format!("s_values = {}", list(&self.s_values)),
            format!(
                "r_min = {}, r_max = {}, r_step = {}",
                self.r_min, self.r_max, self.r_step
            ),
            format!(
                "partitions = {}",
                self.partitions
                    .iter()
                    .map(Partition::token)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub s: f64,
    pub r: f64,
    pub partition: Partition,
    pub lambda_min: f64,
    pub e_n: f64,
    pub separable: bool,
    /// Purity of the two-mode marginal.
    pub purity_marginal: f64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            format_float(self.s),
            format_float(self.r),
            self.partition.token(),
            format_float(self.lambda_min),
            format_float(self.e_n),
            self.separable,
            format_float(self.purity_marginal),
        )
    }
}

/// Rows for one `(s, r)` point, plus the purity of the global state.
pub fn evaluate_point(
    params: &ScenarioParams,
    partitions: &[Partition],
) -> Result<(Vec<ResultRow>, f64)> {
    let state = build_scenario_state(params)?;
    let rows = partitions
        .iter()
        .map(|p| {
            let m = marginal(&state, &p.modes())?;
            let report = log_negativity(&m, p)?;
            Ok(ResultRow {
                s: params.s(),
                r: params.r(),
                partition: p.clone(),
                lambda_min: report.lambda_min,
                e_n: report.e_n,
                separable: report.separable,
                purity_marginal: purity(&m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, purity(&state)?))
}

/// Evaluates every grid point (in parallel) and returns rows ordered by
/// `s`, then `r`, then partition.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    let rs = spec.r_values();
    let points: Vec<(f64, f64)> = spec
        .s_values
        .iter()
        .flat_map(|&s| rs.iter().map(move |&r| (s, r)))
        .collect();
    let chunks = points
        .par_iter()
        .map(|&(s, r)| {
            let params = ScenarioParams::new(s, r)?;
            evaluate_point(&params, &spec.partitions).map(|(rows, _)| rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Full CSV document: `#` comment lines, header, one line per row, `\n`
/// line endings.
pub fn render_csv(comments: &[String], rows: &[ResultRow]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

pub fn sweep_csv(spec: &SweepSpec) -> Result<String> {
    let rows = run_sweep(spec)?;
    let mut comments = vec!["unruh-gauss sweep".to_string(), CONVENTIONS.to_string()];
    comments.extend(spec.describe());
    Ok(render_csv(&comments, &rows))
}

pub fn figure2_csv() -> Result<(String, Vec<ResultRow>)> {
    let spec = SweepSpec::figure2();
    let rows = run_sweep(&spec)?;
    let mut comments = vec![
        "unruh-gauss figure2: logarithmic negativity of A|I versus acceleration r".to_string(),
        "s values 0.5, 1.0, 1.5 are illustrative choices built into this command".to_string(),
        CONVENTIONS.to_string(),
    ];
    comments.extend(spec.describe());
    Ok((render_csv(&comments, &rows), rows))
}

/// Plain SVG line plot of `e_n` against `r`, one polyline per `s`.
pub fn render_svg(rows: &[ResultRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];

    let mut series: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        match series.last_mut() {
            Some((s, pts)) if *s == row.s => pts.push((row.r, row.e_n)),
            _ => series.push((row.s, vec![(row.r, row.e_n)])),
        }
    }
    let r_max = rows.iter().map(|r| r.r).fold(0.0, f64::max).max(1e-12);
    let y_max = rows.iter().map(|r| r.e_n).fold(0.0, f64::max).max(1e-12);
    let x = |r: f64| LEFT + r / r_max * (W - LEFT - RIGHT);
    let y = |e: f64| H - BOTTOM - e / y_max * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" stroke="black" fill="none"/>"#,
        LEFT,
        TOP,
        LEFT,
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    );
    for k in 0..=5 {
        let rv = r_max * k as f64 / 5.0;
        let ev = y_max * k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{rv:.2}</text>"#,
            x(rv),
            H - BOTTOM + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{ev:.2}</text>"#,
            LEFT - 6.0,
            y(ev) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">r</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">E_N</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0
    );
    for (k, (s, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(r, e)| format!("{:.2},{:.2}", x(r), y(e)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="12" fill="{color}">s = {s}</text>"#,
            W - RIGHT - 70.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Oracle-vs-Gaussian deviations at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDeviation {
    pub s: f64,
    pub r: f64,
    pub max_cov_dev: f64,
    /// Quadrature labels of the worst covariance entry, e.g. `q_A,q_I`.
    pub worst_entry: String,
    pub max_en_dev: f64,
    pub worst_partition: Partition,
}

impl PointDeviation {
    pub fn passed(&self) -> bool {
        self.max_cov_dev <= COV_TOL && self.max_en_dev <= EN_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub cutoff: usize,
    pub points: Vec<PointDeviation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(PointDeviation::passed)
    }

    /// The failing point with the largest covariance deviation, or failing
    /// the negativity check if no covariance entry is out of tolerance.
    pub fn worst_failure(&self) -> Option<&PointDeviation> {
        self.points.iter().filter(|p| !p.passed()).max_by(|a, b| {
            (a.max_cov_dev / COV_TOL)
                .max(a.max_en_dev / EN_TOL)
                .total_cmp(&(b.max_cov_dev / COV_TOL).max(b.max_en_dev / EN_TOL))
        })
    }
}

fn grid(max: f64) -> Vec<f64> {
    if max == 0.0 {
        vec![0.0]
    } else {
        vec![0.0, 0.5 * max, max]
    }
}

fn quadrature_label(idx: usize) -> String {
    let mode = crate::symplectic::ModeLabel::ALL[idx / 2];
    format!("{}_{mode}", if idx.is_multiple_of(2) { "q" } else { "p" })
}

/// Compares the Fock oracle with the Gaussian construction on the grid
/// `{0, max/2, max}` for each parameter. Refuses (before doing any work)
/// when the truncation tail at the largest point exceeds the oracle limit.
pub fn verify_grid(s_max: f64, r_max: f64, cutoff: usize) -> Result<VerifyReport> {
    let corner = ScenarioParams::new(s_max, r_max)?;
    let tail = truncation_tail(&corner, cutoff);
    if tail > ORACLE_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail,
            limit: ORACLE_TAIL_LIMIT,
        });
    }
    let points: Vec<(f64, f64)> = grid(s_max)
        .into_iter()
        .flat_map(|s| grid(r_max).into_iter().map(move |r| (s, r)))
        .collect();
    let points = points
        .par_iter()
        .map(|&(s, r)| verify_point(&ScenarioParams::new(s, r)?, cutoff))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { cutoff, points })
}

pub fn verify_point(params: &ScenarioParams, cutoff: usize) -> Result<PointDeviation> {
    let gaussian = build_scenario_state(params)?;
    let fock = build_state_fock(params, cutoff)?;
    let oracle = covariance_from_state(&fock);

    let diff = gaussian.entries() - oracle.entries();
    let (worst_idx, max_cov_dev) = diff
        .iter()
        .map(|x| x.abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    let n = diff.nrows();
    // column-major storage
    let (row, col) = (worst_idx % n, worst_idx / n);

    let mut max_en_dev = 0.0;
    let mut worst_partition = Partition::a_i();
    for p in Partition::all_pairs() {
        let e_gauss = log_negativity(&marginal(&gaussian, &p.modes())?, &p)?.e_n;
        let rho = reduced_density(&fock, &p.modes())?;
        let e_fock = log_negativity_fock(&rho, p.left())?;
        let dev = (e_gauss - e_fock).abs();
        if dev > max_en_dev {
            max_en_dev = dev;
            worst_partition = p;
        }
    }
    Ok(PointDeviation {
        s: params.s(),
        r: params.r(),
        max_cov_dev,
        worst_entry: format!("{},{}", quadrature_label(row), quadrature_label(col)),
        max_en_dev,
        worst_partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(format_float(2.0), "2.0000000000000000e0");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-3.5e-12), "-3.5000000000000000e-12");
    }

    #[test]
    fn r_grid_includes_endpoint() {
        let spec = SweepSpec::new(vec![1.0], 0.0, 3.0, 0.05, vec![]).unwrap();
        let rs = spec.r_values();
        assert_eq!(rs.len(), 61);
        assert_eq!(rs[0], 0.0);
        assert!((rs[60] - 3.0).abs() < 1e-12);
        assert_eq!(spec.partitions().len(), 3);
    }

    #[test]
    fn sweep_spec_validation() {
        assert!(SweepSpec::new(vec![], 0.0, 1.0, 0.1, vec![]).is_err());
        assert!(SweepSpec::new(vec![1.0], 0.0, 1.0, 0.0, vec![]).is_err());
        assert!(SweepSpec::new(vec![1.0], 2.0, 1.0, 0.1, vec![]).is_err());
        assert!(SweepSpec::new(vec![-1.0], 0.0, 1.0, 0.1, vec![]).is_err());
        assert!(SweepSpec::new(vec![1.0], 0.0, 1.0, 1e-12, vec![]).is_err());
        let multi = "A-I+II".parse().unwrap();
        assert!(SweepSpec::new(vec![1.0], 0.0, 1.0, 0.1, vec![multi]).is_err());
    }

    #[test]
    fn point_rows_and_purity() {
        let (rows, global) = evaluate_point(
            &ScenarioParams::new(1.0, 0.0).unwrap(),
            &Partition::all_pairs(),
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].e_n - 2.0).abs() < 1e-12);
        assert!((global - 1.0).abs() < 1e-12);
        assert!(rows[1].separable && rows[2].separable);
    }

    #[test]
    fn csv_layout() {
        let spec = SweepSpec::new(vec![0.5], 0.0, 0.1, 0.05, vec![Partition::a_i()]).unwrap();
        let csv = sweep_csv(&spec).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        let header_pos = lines.iter().position(|l| *l == CSV_HEADER).unwrap();
        assert!(lines[..header_pos].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines.len() - header_pos - 1, 3);
        assert!(
            lines[header_pos + 1].starts_with("5.0000000000000000e-1,0.0000000000000000e0,A-I,")
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let spec = SweepSpec::new(vec![0.5, 1.0], 0.0, 1.0, 0.5, vec![Partition::a_i()]).unwrap();
        let svg = render_svg(&run_sweep(&spec).unwrap());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn verify_trivial_and_refusal() {
        let rep = verify_grid(0.0, 0.0, 16).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert!(rep.passed());
        assert_eq!(rep.points[0].max_cov_dev, 0.0);
        assert!(matches!(
            verify_grid(0.5, 0.0, 8),
            Err(Error::CutoffTooSmall { .. })
        ));
    }
}
