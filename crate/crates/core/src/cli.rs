//! Command-line front end. [`run`] does all the work so it can be driven
//! in-process; `main` only forwards `std::env::args` and the exit code.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::lyapunov::{pl_constants, PlanarSystem};
use crate::orbits::{
    boundary_curve, center_type, integrate, ray_return_time, IntegratorConfig, Method, OrbitError,
};
use crate::qpoly::{parse_expr, parse_rational, Poly, RationalFunction, Var};
use crate::quintic::{
    build_system, classify, commuting_partner, first_integral, theorem_case, CenterCase, Classification,
    FirstIntegralSpec, QuinticParams, NAMES,
};
use crate::structure::{
    angular_speed_residual, cofactor_of, lie_bracket, rational_integral_residual, reversibility_residual,
    reversible_modulo_constraint, verify_darboux_integral, DarbouxVerdict, ReversibilityVerdict,
};

/// Residual polynomials are shown with at most this many terms in text
/// output (JSON always carries the full polynomial).
pub const DISPLAY_TERMS: usize = 20;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "isocenter", version, about = "Center conditions and isochronicity checks for planar polynomial systems")]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timings (makes output non-deterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// JSON system document.
    #[arg(long, value_name = "PATH", conflicts_with = "family")]
    system: Option<PathBuf>,
    /// Quintic family coefficients a,b,c,d,e,f,g,h (expressions).
    #[arg(long, value_name = "a,b,c,d,e,f,g,h", allow_hyphen_values = true)]
    family: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poincaré–Lyapunov constants D1..Dm.
    Plconst {
        #[command(flatten)]
        input: SystemArgs,
        #[arg(short = 'm', default_value_t = 4)]
        m: usize,
    },
    /// Center/focus verdict for numeric family coefficients.
    Classify {
        #[command(flatten)]
        input: SystemArgs,
        #[arg(short = 'm', default_value_t = 4)]
        m: usize,
    },
    /// Check a structural property.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Integrate an orbit and time its return to the starting ray.
    Orbit {
        #[command(flatten)]
        input: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Use fixed-step RK4 with this step instead of the adaptive method.
        #[arg(long, value_name = "STEP")]
        rk4: Option<f64>,
        /// CSV output (t,x,y).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Period-annulus boundary of a case (i) center.
    Boundary {
        /// d,e,g,h
        #[arg(allow_hyphen_values = true)]
        coeffs: String,
        #[arg(short = 'n', default_value_t = 256)]
        n: usize,
        /// CSV output (phi,rho).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyKind {
    /// Lie bracket with a partner system.
    Commute {
        #[command(flatten)]
        input: SystemArgs,
        /// Partner system document; defaults to the family's partner.
        #[arg(long, value_name = "PATH")]
        partner: Option<PathBuf>,
        /// Center case (i, ii, iii) when the coefficients are symbolic.
        #[arg(long)]
        case: Option<String>,
    },
    /// Invariant algebraic curve C = 0.
    Invariant {
        #[command(flatten)]
        input: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
    },
    /// First integral H = num/den, or the family's own integral.
    Integral {
        #[command(flatten)]
        input: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        num: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        den: String,
        #[arg(long)]
        case: Option<String>,
    },
    /// Reversibility about the line αx + βy = 0, or about the lines
    /// s·x − y = 0 with s a root of a constraint.
    Reversible {
        #[command(flatten)]
        input: SystemArgs,
        /// α,β
        #[arg(long, allow_hyphen_values = true, conflicts_with = "constraint")]
        line: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        constraint: Option<String>,
        #[arg(long, default_value = "s")]
        slope: String,
    },
    /// Constant angular velocity form ẋ = y + xR, ẏ = −x + yR.
    Form1 {
        #[command(flatten)]
        input: SystemArgs,
    },
}

/// System input file. Either `p`/`q` or `family` with `a … h`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub p: Option<String>,
    pub q: Option<String>,
    pub family: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub c: Option<String>,
    pub d: Option<String>,
    pub e: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub h: Option<String>,
    #[serde(default)]
    pub bindings: BTreeMap<String, String>,
}

pub const FAMILY_TAG: &str = "quintic-uic";

/// A resolved input: the system, plus the family coefficients when it came
/// from the quintic family.
#[derive(Debug, Clone)]
pub struct Input {
    pub system: PlanarSystem,
    pub family: Option<QuinticParams>,
    pub echo: String,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InputError(String);

fn input_err(e: impl std::fmt::Display) -> InputError {
    InputError(e.to_string())
}

impl SystemDocument {
    pub fn resolve(&self) -> Result<Input, String> {
        let mut bindings = BTreeMap::new();
        for (k, v) in &self.bindings {
            bindings.insert(Var::new(k), parse_rational(v).map_err(|e| format!("binding {k}: {e}"))?);
        }
        let coeffs = [&self.a, &self.b, &self.c, &self.d, &self.e, &self.f, &self.g, &self.h];
        match (&self.family, &self.p, &self.q) {
            (None, Some(p), Some(q)) => {
                if coeffs.iter().any(|c| c.is_some()) {
                    return Err("a..h are only allowed with \"family\"".into());
                }
                let sys = PlanarSystem::parse(p, q).map_err(|e| e.to_string())?.bind(&bindings);
                Ok(Input { echo: format!("p = {}, q = {}", sys.p, sys.q), system: sys, family: None })
            }
            (Some(tag), None, None) => {
                if tag != FAMILY_TAG {
                    return Err(format!("unknown family \"{tag}\" (expected \"{FAMILY_TAG}\")"));
                }
                let mut out: [Poly; 8] = Default::default();
                for ((slot, text), name) in out.iter_mut().zip(coeffs).zip(NAMES) {
                    let text = text.as_ref().ok_or_else(|| format!("missing coefficient {name}"))?;
                    *slot = parse_expr(text).map_err(|e| format!("coefficient {name}: {e}"))?;
                }
                Ok(family_input(QuinticParams::new(out).bind(&bindings)))
            }
            _ => Err("system document needs either p and q, or family with a..h".into()),
        }
    }
}

fn family_input(params: QuinticParams) -> Input {
    Input {
        system: build_system(&params),
        echo: format!("family {params}"),
        family: Some(params),
    }
}

fn read_document(path: &Path) -> Result<Input, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let doc: SystemDocument =
        serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    doc.resolve().map_err(|e| InputError(format!("{}: {e}", path.display())))
}

impl SystemArgs {
    fn resolve(&self) -> Result<Input, InputError> {
        match (&self.system, &self.family) {
            (Some(path), None) => read_document(path),
            (None, Some(list)) => Ok(family_input(QuinticParams::parse_list(list).map_err(input_err)?)),
            _ => Err(InputError("exactly one of --system or --family is required".into())),
        }
    }
}

#[derive(Debug, Serialize)]
struct Output {
    name: String,
    value: String,
}

/// Result of one command. Rendered as text or JSON; byte-identical for
/// identical inputs unless timings are requested.
#[derive(Debug, Serialize)]
pub struct Report {
    command: String,
    inputs: Vec<Output>,
    verdict: Option<String>,
    outputs: Vec<Output>,
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
    #[serde(skip)]
    exit: i32,
    #[serde(skip)]
    display_overrides: BTreeMap<String, String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            inputs: Vec::new(),
            verdict: None,
            outputs: Vec::new(),
            notes: Vec::new(),
            elapsed_ms: None,
            exit: EXIT_OK,
            display_overrides: BTreeMap::new(),
        }
    }

    fn input(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.inputs.push(Output { name: name.into(), value: value.to_string() });
        self
    }

    fn output(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.outputs.push(Output { name: name.into(), value: value.to_string() });
        self
    }

    /// A polynomial output, truncated in text form when long.
    fn poly(&mut self, name: &str, p: &Poly) -> &mut Self {
        if p.num_terms() > DISPLAY_TERMS {
            let shown: Poly = Poly::from_terms(
                p.terms()
                    .rev()
                    .take(DISPLAY_TERMS)
                    .map(|(m, c)| (m.clone(), c.clone())),
            );
            self.display_overrides.insert(
                name.into(),
                format!("{shown}\n({} more terms not shown)", p.num_terms() - DISPLAY_TERMS),
            );
        }
        self.output(name, p)
    }

    fn verdict(&mut self, v: impl ToString, exit: i32) -> &mut Self {
        self.verdict = Some(v.to_string());
        self.exit = exit;
        self
    }

    fn note(&mut self, n: impl ToString) -> &mut Self {
        self.notes.push(n.to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.exit
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        if let Some(v) = &self.verdict {
            let _ = writeln!(s, "{v}");
        }
        for o in &self.outputs {
            let value = self.display_overrides.get(&o.name).unwrap_or(&o.value);
            let _ = writeln!(s, "{} = {}", o.name, value);
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(s, "# elapsed {ms:.3} ms");
        }
        s
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn parse_case(text: &str, params: &QuinticParams) -> Result<CenterCase, InputError> {
    match text {
        "i" => Ok(CenterCase::CaseI),
        "ii" => Ok(CenterCase::CaseII),
        "iii" => Ok(CenterCase::case_iii_for(params)),
        other => Err(InputError(format!("unknown case '{other}' (expected i, ii or iii)"))),
    }
}

/// The case given with `--case`, or the one detected for numeric
/// coefficients.
fn family_case(input: &Input, case: Option<&str>) -> Result<(QuinticParams, CenterCase), InputError> {
    let params = input
        .family
        .clone()
        .ok_or_else(|| InputError("this check needs a family system (or an explicit partner/integral)".into()))?;
    let case = match case {
        Some(c) => parse_case(c, &params)?,
        None => theorem_case(&params)
            .map_err(|_| InputError("symbolic coefficients: pass --case".into()))?
            .ok_or_else(|| InputError("coefficients satisfy none of the center cases".into()))?,
    };
    Ok((params, case))
}

fn parse_floats<const N: usize>(text: &str) -> Result<[f64; N], InputError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(InputError(format!("expected {N} comma-separated numbers, got {}", parts.len())));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = match parse_rational(p) {
            Ok(r) => crate::qpoly::rational_to_f64(&r),
            Err(_) => p.parse::<f64>().map_err(|_| InputError(format!("not a number: '{p}'")))?,
        };
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_plconst(input: &SystemArgs, m: usize) -> Result<Report, InputError> {
    let inp = input.resolve()?;
    let lr = pl_constants(&inp.system, m).map_err(input_err)?;
    let mut r = Report::new("plconst");
    r.input("system", &inp.echo).input("m", m);
    for (i, c) in lr.constants.iter().enumerate() {
        r.output(&format!("D{}", i + 1), c);
    }
    Ok(r)
}

fn cmd_classify(input: &SystemArgs, m: usize) -> Result<Report, InputError> {
    let inp = input.resolve()?;
    let params = inp.family.ok_or_else(|| InputError("classify needs family coefficients".into()))?;
    let mut r = Report::new("classify");
    r.input("family", &params).input("m", m);
    match classify(&params, m).map_err(input_err)? {
        Classification::Center(case) => {
            r.verdict(format!("CENTER case={}", case.label()), EXIT_OK);
            if let Ok(v) = center_type(&params, &case) {
                r.output("type", v.tag.label());
            }
        }
        Classification::Focus { index, sign } => {
            r.verdict(format!("FOCUS k={index} sign={}", sign.symbol()), EXIT_NEGATIVE);
        }
        Classification::Undetermined(m) => {
            r.verdict(format!("UNDETERMINED m={m}"), EXIT_NEGATIVE);
        }
    }
    Ok(r)
}

fn pass_fail(r: &mut Report, ok: bool) {
    if ok {
        r.verdict("PASS", EXIT_OK);
    } else {
        r.verdict("FAIL", EXIT_NEGATIVE);
    }
}

fn cmd_verify(kind: &VerifyKind) -> Result<Report, InputError> {
    match kind {
        VerifyKind::Commute { input, partner, case } => {
            let inp = input.resolve()?;
            let mut r = Report::new("verify commute");
            r.input("system", &inp.echo);
            let other = match partner {
                Some(path) => read_document(path)?.system,
                None => {
                    let (params, case) = family_case(&inp, case.as_deref())?;
                    r.input("case", case.label());
                    commuting_partner(&params, &case).map_err(input_err)?
                }
            };
            r.input("partner", format!("p = {}, q = {}", other.p, other.q));
            let (u, v) = lie_bracket(&inp.system, &other);
            pass_fail(&mut r, u.is_zero() && v.is_zero());
            r.poly("bracket_p", &u).poly("bracket_q", &v);
            Ok(r)
        }
        VerifyKind::Invariant { input, curve } => {
            let inp = input.resolve()?;
            let c = parse_expr(curve).map_err(input_err)?;
            if c.is_zero() {
                return Err(InputError("curve must be nonzero".into()));
            }
            let mut r = Report::new("verify invariant");
            r.input("system", &inp.echo).input("curve", &c);
            match cofactor_of(&inp.system, &c) {
                Some(k) => {
                    pass_fail(&mut r, true);
                    r.poly("cofactor", &k);
                }
                None => {
                    pass_fail(&mut r, false);
                    r.poly("derivative", &inp.system.derivative_along(&c));
                }
            }
            Ok(r)
        }
        VerifyKind::Integral { input, num, den, case } => {
            let inp = input.resolve()?;
            let mut r = Report::new("verify integral");
            r.input("system", &inp.echo);
            if let Some(num) = num {
                let n = parse_expr(num).map_err(input_err)?;
                let d = parse_expr(den).map_err(input_err)?;
                let h = RationalFunction::new(n, d).ok_or_else(|| InputError("denominator is zero".into()))?;
                r.input("H", &h);
                let res = rational_integral_residual(&inp.system, &h);
                pass_fail(&mut r, res.is_zero());
                r.poly("residual", &res);
                return Ok(r);
            }
            let (params, case) = family_case(&inp, case.as_deref())?;
            r.input("case", case.label());
            match first_integral(&params, &case) {
                Ok(FirstIntegralSpec::RationalH(h)) => {
                    let res = rational_integral_residual(&inp.system, &h);
                    r.output("H", &h);
                    pass_fail(&mut r, res.is_zero());
                    r.poly("residual", &res);
                }
                Ok(FirstIntegralSpec::DarbouxWithExp(c)) => {
                    let verdict = verify_darboux_integral(&inp.system, &c).map_err(input_err)?;
                    for (i, (inv, l)) in c.algebraic.iter().enumerate() {
                        r.output(&format!("C{}", i + 1), &inv.curve)
                            .output(&format!("L{}", i + 1), &inv.cofactor)
                            .output(&format!("lambda{}", i + 1), l);
                    }
                    for (j, (inv, l)) in c.exponential.iter().enumerate() {
                        let i = c.algebraic.len() + j + 1;
                        r.output(&format!("L{i}"), &inv.cofactor).output(&format!("lambda{i}"), l);
                    }
                    match verdict {
                        DarbouxVerdict::Certified => pass_fail(&mut r, true),
                        DarbouxVerdict::Failed(res) => {
                            pass_fail(&mut r, false);
                            r.poly("residual", &res);
                        }
                    }
                }
                Ok(FirstIntegralSpec::NumericOnly(rot)) => {
                    r.verdict("PASS", EXIT_OK)
                        .output("tan_phi", format!("{:.16e}", rot.tan_phi))
                        .output("e1", format!("{:.16e}", rot.e1))
                        .output("g1", format!("{:.16e}", rot.g1))
                        .note("integral available numerically after rotation to the case (ii) shape");
                }
                Err(e) => {
                    r.verdict("FAIL", EXIT_NEGATIVE).note(e);
                }
            }
            Ok(r)
        }
        VerifyKind::Reversible { input, line, constraint, slope } => {
            let inp = input.resolve()?;
            let mut r = Report::new("verify reversible");
            r.input("system", &inp.echo);
            match (line, constraint) {
                (Some(line), None) => {
                    let parts: Vec<&str> = line.split(',').collect();
                    if parts.len() != 2 {
                        return Err(InputError("--line expects α,β".into()));
                    }
                    let alpha = parse_expr(parts[0]).map_err(input_err)?;
                    let beta = parse_expr(parts[1]).map_err(input_err)?;
                    if alpha.is_zero() && beta.is_zero() {
                        return Err(InputError("(α, β) must not be (0, 0)".into()));
                    }
                    r.input("line", format!("{alpha},{beta}"));
                    let res = reversibility_residual(&inp.system, &alpha, &beta);
                    pass_fail(&mut r, res.is_zero());
                    r.poly("residual", &res);
                }
                (None, Some(c)) => {
                    let c = parse_expr(c).map_err(input_err)?;
                    let s = Var::new(slope);
                    r.input("constraint", &c).input("slope", slope);
                    match reversible_modulo_constraint(&inp.system, &c, &s).map_err(input_err)? {
                        ReversibilityVerdict::Yes => pass_fail(&mut r, true),
                        ReversibilityVerdict::No(w) => {
                            pass_fail(&mut r, false);
                            r.poly("witness", &w);
                        }
                    }
                }
                _ => return Err(InputError("pass exactly one of --line or --constraint".into())),
            }
            Ok(r)
        }
        VerifyKind::Form1 { input } => {
            let inp = input.resolve()?;
            let mut r = Report::new("verify form1");
            r.input("system", &inp.echo);
            let res = angular_speed_residual(&inp.system);
            pass_fail(&mut r, res.is_zero());
            r.poly("residual", &res);
            Ok(r)
        }
    }
}

fn csv_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_orbit(
    input: &SystemArgs,
    x0: f64,
    y0: f64,
    t_end: f64,
    tol: f64,
    rk4: Option<f64>,
    out: Option<&Path>,
) -> Result<Report, InputError> {
    let inp = input.resolve()?;
    if !inp.system.is_numeric() {
        return Err(InputError(format!("orbit needs a numeric system, got {}", inp.echo)));
    }
    if !(tol > 0.0) || !(t_end > 0.0) || !x0.is_finite() || !y0.is_finite() {
        return Err(InputError("need tol > 0, t_end > 0 and a finite start point".into()));
    }
    let mut cfg = IntegratorConfig::default().with_tol(tol);
    if let Some(step) = rk4 {
        if !(step > 0.0) {
            return Err(InputError("--rk4 step must be positive".into()));
        }
        cfg.method = Method::Rk4 { step };
    }
    let mut r = Report::new("orbit");
    r.input("system", &inp.echo)
        .input("x0", csv_f64(x0))
        .input("y0", csv_f64(y0))
        .input("t_end", csv_f64(t_end))
        .input("tol", csv_f64(tol));
    let traj = match integrate(&inp.system, x0, y0, t_end, cfg) {
        Ok(t) => t,
        Err(e @ OrbitError::InvalidInput(_)) => return Err(input_err(e)),
        Err(e) => {
            r.verdict("ERROR", EXIT_NEGATIVE).note(e);
            return Ok(r);
        }
    };
    if let Some(path) = out {
        let mut csv = String::from("t,x,y\n");
        for s in &traj.samples {
            let _ = writeln!(csv, "{},{},{}", csv_f64(s.t), csv_f64(s.x), csv_f64(s.y));
        }
        write_file(path, &csv).map_err(InputError)?;
        r.output("csv", path.display());
    }
    let end = traj.last();
    r.verdict("OK", EXIT_OK)
        .output("samples", traj.samples.len())
        .output("t_final", csv_f64(end.t))
        .output("x_final", csv_f64(end.x))
        .output("y_final", csv_f64(end.y));
    if x0 == 0.0 && y0 == 0.0 {
        r.note("start point is the origin; no return time");
        return Ok(r);
    }
    match ray_return_time(&inp.system, x0, y0, cfg) {
        Ok(rr) => {
            r.output("return_time", csv_f64(rr.period))
                .output("closure_defect", csv_f64(rr.closure_defect(x0, y0)))
                .output("radial_growth", csv_f64(rr.radial_growth(x0, y0)));
        }
        Err(e) => {
            r.note(format!("no ray return: {e}"));
        }
    }
    Ok(r)
}

fn cmd_boundary(coeffs: &str, n: usize, out: Option<&Path>) -> Result<Report, InputError> {
    let [d, e, g, h] = parse_floats::<4>(coeffs)?;
    let mut r = Report::new("boundary");
    r.input("d,e,g,h", coeffs).input("n", n);
    match boundary_curve(d, e, g, h, n) {
        Ok(b) => {
            if let Some(path) = out {
                let mut csv = String::from("phi,rho\n");
                for (phi, rho) in &b.samples {
                    let _ = writeln!(csv, "{},{}", csv_f64(*phi), csv_f64(*rho));
                }
                write_file(path, &csv).map_err(InputError)?;
                r.output("csv", path.display());
            }
            let tag = match b.maximizers.len() {
                2 => "B2",
                4 => "B4",
                _ => "Unknown",
            };
            r.verdict(tag, EXIT_OK)
                .output("c0", csv_f64(b.c0))
                .output("maximizers", b.maximizers.len())
                .output(
                    "maximizer_angles",
                    b.maximizers.iter().map(|m| csv_f64(*m)).collect::<Vec<_>>().join(","),
                );
        }
        Err(OrbitError::InapplicableBoundary { c0 }) => {
            r.verdict("INAPPLICABLE", EXIT_NEGATIVE)
                .output("c0", csv_f64(c0))
                .note("boundary formula inapplicable (c0 <= 0)");
        }
        Err(e) => return Err(input_err(e)),
    }
    Ok(r)
}

fn dispatch(cli: &Cli) -> Result<Report, InputError> {
    match &cli.command {
        Command::Plconst { input, m } => cmd_plconst(input, *m),
        Command::Classify { input, m } => cmd_classify(input, *m),
        Command::Verify { kind } => cmd_verify(kind),
        Command::Orbit { input, x0, y0, t_end, tol, rk4, out } => {
            cmd_orbit(input, *x0, *y0, *t_end, *tol, *rk4, out.as_deref())
        }
        Command::Boundary { coeffs, n, out } => cmd_boundary(coeffs, *n, out.as_deref()),
    }
}

/// Runs one invocation (`args[0]` is the program name) and returns the
/// exit code: 0 affirmative, 1 negative-but-valid, 2 input error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let start = Instant::now();
    match dispatch(&cli) {
        Ok(mut report) => {
            if cli.timings {
                report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let text = if cli.json { report.render_json() } else { report.render_text() };
            let _ = stdout.write_all(text.as_bytes());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}
