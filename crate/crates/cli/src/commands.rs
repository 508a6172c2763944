use std::path::{Path, PathBuf};

use anyonspectra::bound_states::{compare_line, Line};
use anyonspectra::exec::Execution;
use anyonspectra::group::{parse_tuple, FiniteAbelianGroup};
use anyonspectra::lattice::{parse_steps, TorusLattice};
use anyonspectra::many_body::{holonomy, verify_suite, Couplings, HamiltonianSpec, Model, SuiteOptions};
use anyonspectra::sector_spectra::{
    band_grid, fiber_operator, fiber_spectrum, linspace, sweep, RelativeWindow, SectorParams, SpectrumOptions,
    SweepOptions, SweepSummary,
};
use anyonspectra::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{to_json, Cell, Table};
use crate::{CliError, Outcome, RunArgs};

const HOLONOMY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineArg {
    Kx,
    Ky,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be finite, got {x}")))
    }
}

fn floats(name: &str, s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{p}' in --{name}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(usage(format!("--{name} needs {n} comma-separated values, got '{s}'")));
    }
    for x in &v {
        finite(name, *x)?;
    }
    Ok(v)
}

fn pair(name: &str, s: &str) -> Result<(i64, i64), CliError> {
    let v = floats(name, s, 2)?;
    if v.iter().any(|x| x.fract() != 0.0) {
        return Err(usage(format!("--{name} needs integer coordinates, got '{s}'")));
    }
    Ok((v[0] as i64, v[1] as i64))
}

fn torus(s: &str) -> Result<TorusLattice, CliError> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("--torus expects LxXLy such as 2x2, got '{s}'")))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("bad torus size '{s}'")));
    Ok(TorusLattice::new(parse(a)?, parse(b)?)?)
}

/// `chi(g)` for the given group, character and element tuples.
fn phase(group: &str, chi: &str, g: &str) -> Result<Complex64, CliError> {
    let grp: FiniteAbelianGroup = group.parse()?;
    let c = grp.character(&parse_tuple(chi)?)?;
    let e = grp.element(&parse_tuple(g)?)?;
    Ok(grp.char_eval(c, e))
}

fn table_output(t: &Table, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct BandsArgs {
    #[arg(long, default_value = "Z3")]
    pub group: String,
    #[arg(long, default_value = "1")]
    pub chi: String,
    #[arg(long, default_value = "1")]
    pub g: String,
    /// Points per axis on [0, pi/2).
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for BandsArgs {
    const NAME: &'static str = "bands";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let p = SectorParams::new(phase(&self.group, &self.chi, &self.g)?, 0.0, 1.0, finite("mass", self.mass)?, 0.0, 0.0)?;
        let mut t = Table::new(&["kx", "ky", "E1", "E2", "E3", "E4"]);
        for b in band_grid(&p, self.grid, Execution::Parallel)? {
            let mut row = vec![Cell::Float(b.kx), Cell::Float(b.ky)];
            row.extend(b.energies.iter().map(|e| Cell::Float(*e)));
            t.push(row);
        }
        Ok(Outcome { body: table_output(&t, self.format)?, meta: None, failure: None })
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct FiberSpecArgs {
    #[arg(long, default_value = "Z3")]
    pub group: String,
    #[arg(long, default_value = "1")]
    pub chi: String,
    #[arg(long, default_value = "1")]
    pub g: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 0.0)]
    pub kx: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ky: f64,
    /// Window size L; the fiber has dimension 4L^2.
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for FiberSpecArgs {
    const NAME: &'static str = "fiberspec";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let p = SectorParams::new(
            phase(&self.group, &self.chi, &self.g)?,
            finite("lambda", self.lambda)?,
            finite("rho", self.rho)?,
            finite("mass", self.mass)?,
            finite("kx", self.kx)?,
            finite("ky", self.ky)?,
        )?;
        let op = fiber_operator(&p, &RelativeWindow::new(self.window)?)?;
        let opts = SpectrumOptions { vectors: true, ..Default::default() };
        let s = fiber_spectrum(&op, &opts)?;
        let iprs = s.iprs.clone().unwrap_or_default();
        let mut t = Table::new(&["index", "energy", "is_outlier", "ipr"]);
        for (i, (e, ipr)) in s.eigenvalues.iter().zip(&iprs).enumerate() {
            t.push(vec![Cell::Int(i as u64), Cell::Float(*e), Cell::Bool(e.abs() > s.radius + opts.tol), Cell::Float(*ipr)]);
        }
        let outliers: Vec<_> = s
            .outliers
            .iter()
            .map(|o| json!({ "energy": o.energy, "ipr": o.ipr.unwrap_or(0.0), "row": o.row.unwrap_or(0) }))
            .collect();
        let meta = json!({
            "R": s.radius,
            "outliers": outliers,
            "ipr_max": s.ipr_max.unwrap_or(0.0),
            "dim": op.dim(),
        });
        Ok(Outcome { body: table_output(&t, self.format)?, meta: Some(to_json(&meta)?), failure: None })
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct BoundStatesArgs {
    #[arg(long, default_value = "Z3")]
    pub group: String,
    #[arg(long, default_value = "1")]
    pub chi: String,
    #[arg(long, default_value = "1")]
    pub g: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Momentum along the line `k_y = pi/4`.
    #[arg(long, default_value_t = 0.0)]
    pub kx: f64,
    /// Momentum along the line `k_x = pi/4`.
    #[arg(long, default_value_t = 0.0)]
    pub ky: f64,
    #[arg(long, value_enum, default_value_t = LineArg::Kx)]
    pub line: LineArg,
    #[arg(long, default_value_t = 40)]
    pub window: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for BoundStatesArgs {
    const NAME: &'static str = "boundstates";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let (line, k) = match self.line {
            LineArg::Kx => (Line::Kx, finite("kx", self.kx)?),
            LineArg::Ky => (Line::Ky, finite("ky", self.ky)?),
        };
        let c = compare_line(
            line,
            finite("lambda", self.lambda)?,
            finite("rho", self.rho)?,
            k,
            phase(&self.group, &self.chi, &self.g)?,
            self.window,
            Execution::Parallel,
        )?;
        let mut v = json!({
            "line": line,
            "k": k,
            "B": c.analytic.b,
            "analytic_energies": c.analytic.energies,
            "numeric_energies": c.numeric,
            "converged": c.converged,
        });
        let obj = v.as_object_mut().expect("object literal");
        for (key, val) in
            [("gap", c.gap), ("max_error", c.max_error), ("tail_ratio", c.tail_ratio), ("localization_rate", c.analytic.localization_rate)]
        {
            if let Some(x) = val {
                obj.insert(key.into(), json!(x));
            }
        }
        let failure = (!c.converged).then(|| {
            format!("{} numeric outliers, largest deviation {:?}", c.numeric.len(), c.max_error)
        });
        Ok(Outcome { body: to_json(&v)?, meta: None, failure })
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "Z3")]
    pub group: String,
    #[arg(long, default_value = "1")]
    pub chi: String,
    #[arg(long, default_value = "1")]
    pub g: String,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda_max: f64,
    /// Number of lambda values, endpoints included.
    #[arg(long, default_value_t = 80)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Momentum as `kx,ky`.
    #[arg(long, default_value = "0,0")]
    pub k: String,
    #[arg(long, default_value_t = 30)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for SweepArgs {
    const NAME: &'static str = "sweep";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let k = floats("k", &self.k, 2)?;
        let (lo, hi) = (finite("lambda-min", self.lambda_min)?, finite("lambda-max", self.lambda_max)?);
        if self.steps == 0 || lo < 0.0 || hi < lo {
            return Err(usage("need steps >= 1 and 0 <= lambda-min <= lambda-max"));
        }
        let base = SectorParams::new(phase(&self.group, &self.chi, &self.g)?, lo, finite("rho", self.rho)?, 0.0, k[0], k[1])?;
        let opts = SweepOptions::new(self.window);
        let points = sweep(&base, &linspace(lo, hi, self.steps), &opts)?;
        let mut t = Table::new(&["lambda", "eig_index", "energy", "is_outlier"]);
        for p in &points {
            for (i, e) in p.eigenvalues.iter().enumerate() {
                t.push(vec![Cell::Float(p.lambda), Cell::Int(i as u64), Cell::Float(*e), Cell::Bool(p.is_outlier(*e, opts.tol))]);
            }
        }
        let summary = SweepSummary::new(&points);
        let meta = json!({
            "lambdas": summary.lambdas,
            "outlier_counts": summary.outlier_counts,
            "four_outlier_runs": summary.four_outlier_runs,
            "R": points.iter().map(|p| p.radius).collect::<Vec<_>>(),
        });
        Ok(Outcome { body: table_output(&t, self.format)?, meta: Some(to_json(&meta)?), failure: None })
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, default_value = "Z2")]
    pub group: String,
    #[arg(long, default_value = "2x2")]
    pub torus: String,
    /// `lambda_e,lambda_m,lambda_em`.
    #[arg(long, default_value = "0.3,0.7,0.5")]
    pub lambdas: String,
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for VerifyArgs {
    const NAME: &'static str = "verify";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let l = floats("lambdas", &self.lambdas, 3)?;
        let couplings = Couplings::new(l[0], l[1], l[2]).with_mass(finite("mass", self.mass)?);
        couplings.validate()?;
        let spec = HamiltonianSpec { group: self.group.parse()?, torus: torus(&self.torus)?, couplings };
        let checks = verify_suite(&spec, &SuiteOptions::default())?;
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let v = json!({
            "group": spec.group.to_string(),
            "torus": format!("{}x{}", spec.torus.lx(), spec.torus.ly()),
            "couplings": couplings,
            "checks": checks,
            "pass": failed.is_empty(),
        });
        let failure = (!failed.is_empty()).then(|| failed.join(", "));
        Ok(Outcome { body: to_json(&v)?, meta: None, failure })
    }
}

#[derive(Clone, Debug, clap::Args, Serialize, Deserialize)]
pub struct HolonomyArgs {
    #[arg(long, default_value = "Z2")]
    pub group: String,
    #[arg(long, default_value = "2x2")]
    pub torus: String,
    #[arg(long, default_value = "1")]
    pub chi: String,
    #[arg(long, default_value = "1")]
    pub g: String,
    /// Steps of the dual string creating the flux pair.
    #[arg(long, default_value = "R")]
    pub dual: String,
    /// Start face `x,y` of the dual string.
    #[arg(long, default_value = "0,0")]
    pub dual_start: String,
    /// Steps of the closed charge loop; defaults to the boundary of the
    /// start face of the dual string.
    #[arg(long = "loop")]
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub loop_steps: Option<String>,
    /// Start vertex `x,y` of the loop.
    #[arg(long, default_value = "0,0")]
    pub loop_start: String,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunArgs for HolonomyArgs {
    const NAME: &'static str = "holonomy";
    fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
    fn execute(&self) -> Result<Outcome, CliError> {
        let group: FiniteAbelianGroup = self.group.parse()?;
        let l = torus(&self.torus)?;
        let chi = group.character(&parse_tuple(&self.chi)?)?;
        let h = group.element(&parse_tuple(&self.g)?)?;
        let (fx, fy) = pair("dual-start", &self.dual_start)?;
        let dual = l.dual_from_steps(l.face(fx, fy), &parse_steps(&self.dual)?)?;
        let lp = match &self.loop_steps {
            Some(steps) => {
                let (vx, vy) = pair("loop-start", &self.loop_start)?;
                l.string_from_steps(l.vertex(vx, vy), &parse_steps(steps)?)?
            }
            None => l.face_boundary(dual.start()),
        };
        if !lp.is_closed() {
            return Err(usage("the loop must be closed"));
        }
        let model = Model::new(group, l)?;
        let r = holonomy(&model, chi, h, &dual, &lp)?;
        let pass = r.error < HOLONOMY_TOL;
        let v = json!({
            "measured": r.measured,
            "expected": r.expected,
            "winding": r.winding,
            "error": r.error,
            "pass": pass,
        });
        let failure = (!pass).then(|| format!("holonomy error {:e}", r.error));
        Ok(Outcome { body: to_json(&v)?, meta: None, failure })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(floats("k", "0, 0.5", 2).unwrap(), vec![0.0, 0.5]);
        assert!(floats("k", "0", 2).is_err());
        assert!(floats("k", "nan,0", 2).is_err());
        assert_eq!(pair("p", "1,2").unwrap(), (1, 2));
        assert!(pair("p", "1.5,2").is_err());
        assert_eq!(torus("3x2").unwrap(), TorusLattice::new(3, 2).unwrap());
        assert!(torus("3").is_err());
        let w = phase("Z3", "1", "1").unwrap();
        assert!((w - Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)).norm() < 1e-15);
        assert!(phase("Z3", "3", "1").is_err());
    }
}
