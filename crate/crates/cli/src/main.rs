use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use moebinv::contfrac::{chain, seidel_stern_check, Arrangement, ContinuedFraction, SEIDEL_STERN_THRESHOLD};
use moebinv::cycle::{Cycle, Metric};
use moebinv::error::Error;
use moebinv::figure::ninepoint::nine_point_figure;
use moebinv::figure::script::Script;
use moebinv::figure::{Figure, NodeDef, NodeStatus};
use moebinv::numerics::{eps_cmp, set_eps_cmp, ArithMode, Scalar};
use moebinv::poincare::{classify_triple_of_intervals, extension_from_triple, iwasawa, RealPoint, Sl2};
use moebinv::relations::{check_relation, solve, Relation, SolutionSet, TangentSign};
use moebinv::render::{self, Viewport};

/// Version of every JSON document printed with `--format json`.
const SCHEMA_VERSION: u32 = 1;

const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_OVERFLOW: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_OTHER: u8 = 5;

const NINE: [&str; 9] = ["Fa", "Fb", "Fc", "Ma", "Mb", "Mc", "Ka", "Kb", "Kc"];

#[derive(Parser)]
#[command(name = "moebinv", version, about = "Cycles, figures and Moebius maps in two-dimensional geometries")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Point metric: e, p, h or a signature "p,q,r". Overrides the script.
    #[arg(long, global = true)]
    metric: Option<Metric>,
    /// Arithmetic backend. Overrides the script.
    #[arg(long, global = true, value_enum)]
    arith: Option<Arith>,
    /// Seed for randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arith {
    Exact,
    Float,
}

impl From<Arith> for ArithMode {
    fn from(a: Arith) -> ArithMode {
        match a {
            Arith::Exact => ArithMode::Exact,
            Arith::Float => ArithMode::Float,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Text,
    Svg,
}

#[derive(Args)]
struct ViewArgs {
    /// World window "umin,umax,vmin,vmax"; fitted to the picture if absent.
    #[arg(long, allow_hyphen_values = true)]
    view: Option<String>,
    /// Picture width in pixels.
    #[arg(long, default_value_t = 600.0)]
    width: f64,
    /// Samples per parabola or hyperbola branch.
    #[arg(long, default_value_t = render::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    no_labels: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a figure script and report every node.
    FigureEval { script: PathBuf },
    /// Evaluate a figure script and run its checks.
    FigureCheck { script: PathBuf },
    /// Evaluate a figure script and draw it.
    FigureRender {
        script: PathBuf,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Convergents and horocycle chain of a continued fraction.
    Contfrac {
        /// "b0;b1,b2,..." or "a1/b1 a2/b2 ...".
        #[arg(long, allow_hyphen_values = true)]
        cf: String,
        #[arg(long, default_value = "tangent")]
        arrangement: Arrangement,
        /// Number of steps; all partial quotients by default.
        #[arg(long)]
        steps: Option<usize>,
        /// Also write the chain picture here.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Actions of SL2(R) on the real line and the extended upper half-plane.
    Poincare {
        #[command(subcommand)]
        op: PoincareOp,
    },
    /// Conformal nine-point theorem for one triangle or K random ones.
    Ninepoint {
        /// Three vertices "u,v".
        #[arg(long, num_args = 3, allow_hyphen_values = true)]
        triangle: Vec<String>,
        /// The point playing infinity: "inf" or "u,v".
        #[arg(long = "N", default_value = "inf", allow_hyphen_values = true)]
        n: String,
        /// Check K random rational triangles instead.
        #[arg(long, value_name = "K", conflicts_with = "triangle")]
        random: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Cycles tangent to three given cycles.
    Apollonius {
        /// Three cycles "k,l,n,m".
        #[arg(long = "cycle", num_args = 1, required = true, allow_hyphen_values = true)]
        cycles: Vec<String>,
        /// One of + - * per cycle; * allows both orientations.
        #[arg(long, default_value = "***", allow_hyphen_values = true)]
        signs: String,
        /// Solve each sign combination separately.
        #[arg(long)]
        split: bool,
    },
}

#[derive(Subcommand)]
enum PoincareOp {
    /// Type of the subgroup mapping three intervals "x y" onto each other.
    Classify {
        #[arg(num_args = 6, required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Point of the extended plane fixed by that subgroup.
    Extend {
        #[arg(num_args = 6, required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// g = gA gN gK for g = [a b; c d].
    Iwasawa {
        #[arg(num_args = 4, required = true, allow_hyphen_values = true)]
        g: Vec<String>,
    },
}

/// Result of one command: a text report, a JSON document, maybe a picture.
struct Report {
    command: &'static str,
    text: String,
    json: Value,
    svg: Option<String>,
    ok: bool,
}

enum Failure {
    Engine(Error),
    Input(String),
    Output(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Engine(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Input(_) => EXIT_INPUT,
        Failure::Output(_) => EXIT_OTHER,
        Failure::Engine(e) => match e {
            Error::Parse(_)
            | Error::Script(_)
            | Error::UnknownLabel(_)
            | Error::DuplicateLabel(_)
            | Error::ReservedLabel(_)
            | Error::InvalidRelation(_)
            | Error::InvalidCF(_)
            | Error::InvalidMatrix(_)
            | Error::InvalidTriple(_)
            | Error::InvalidOrdering(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidSignature(_)
            | Error::MetricUnsupported(_) => EXIT_INPUT,
            Error::BranchOverflow { .. } => EXIT_OVERFLOW,
            Error::Degenerate(_) => EXIT_DEGENERATE,
            _ => EXIT_OTHER,
        },
    }
}

fn message(f: &Failure) -> String {
    match f {
        Failure::Engine(e) => e.to_string(),
        Failure::Input(s) | Failure::Output(s) => s.clone(),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

fn scalars(text: &str, n: usize) -> CliResult<Vec<Scalar>> {
    let v = text
        .split(',')
        .map(|t| Scalar::parse_exact(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(Failure::Input(format!("expected {n} comma-separated numbers, got `{text}`")));
    }
    Ok(v)
}

fn viewport(args: &ViewArgs, fitted: impl FnOnce(f64) -> moebinv::error::Result<Viewport>) -> CliResult<Viewport> {
    let mut vp = match &args.view {
        Some(v) => {
            let w: Vec<f64> = v
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Input(format!("bad --view `{v}`")))?;
            if w.len() != 4 {
                return Err(Failure::Input(format!("bad --view `{v}`")));
            }
            Viewport::new(w[0], w[1], w[2], w[3], args.width)?
        }
        None => fitted(args.width)?,
    };
    vp.samples = args.samples;
    vp.labels = !args.no_labels;
    Ok(vp)
}

fn load_script(path: &Path, common: &Common) -> CliResult<(Script, Figure)> {
    let mut s = Script::parse(&read(path)?)?;
    if let Some(m) = &common.metric {
        s.metadata.metric = m.clone();
    }
    if let Some(a) = common.arith {
        s.metadata.arithmetic = a.into();
    }
    let f = s.build()?;
    Ok((s, f))
}

fn status_name(s: NodeStatus) -> &'static str {
    match s {
        NodeStatus::Pending => "pending",
        NodeStatus::Solved => "solved",
        NodeStatus::Parametric => "parametric",
        NodeStatus::Infeasible => "infeasible",
    }
}

/// Largest residual of the relations defining `label` over its instances,
/// or `None` if nothing could be checked.
fn node_residual(fig: &Figure, label: &str, rels: &[Relation<String>]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for r in rels {
        let Some(to) = r.reference() else { continue };
        let Ok(rel) = r.map_ref(|_| Ok(())) else { continue };
        let Ok(checks) = fig.check_rel(label, to, &rel) else { continue };
        for c in checks {
            let x = c.check.residual.to_f64().abs();
            worst = Some(worst.map_or(x, |w| w.max(x)));
        }
    }
    worst
}

fn checks_report(s: &Script, f: &Figure) -> CliResult<(String, Value, bool)> {
    let reports = s.run_checks(f)?;
    let mut text = String::new();
    let mut ok = true;
    for r in &reports {
        let verdicts: Vec<String> = r.branches.iter().map(|b| b.holds.to_string()).collect();
        ok &= r.branches.iter().all(|b| b.holds);
        text.push_str(&format!("check {} {} {}: {}\n", r.a, r.b, r.relation, verdicts.join(",")));
    }
    Ok((text, serde_json::to_value(&reports).expect("reports serialise"), ok))
}

fn figure_eval(path: &Path, common: &Common) -> CliResult<Report> {
    let (s, f) = load_script(path, common)?;
    let mut text = format!("metric {} arithmetic {:?}\n", f.metric(), f.mode());
    let mut nodes = vec![];
    let mut infeasible = false;
    for n in f.nodes() {
        infeasible |= n.status == NodeStatus::Infeasible;
        let residual = match &n.def {
            NodeDef::Relations { relations, .. } => node_residual(&f, &n.label, relations),
            _ => None,
        };
        text.push_str(&format!("{} gen {} {}", n.label, n.generation, status_name(n.status)));
        if let Some(r) = residual {
            text.push_str(&format!(" residual {r:e}"));
        }
        text.push('\n');
        for i in &n.instances {
            text.push_str(&format!("  {}\n", i.cycle));
        }
        for fam in &n.families {
            text.push_str(&format!("  family of dimension {}\n", fam.family.dimension()));
        }
        nodes.push(json!({
            "label": n.label,
            "generation": n.generation,
            "status": n.status,
            "parents": n.parents,
            "demoted": n.demoted,
            "notes": n.notes,
            "residual": residual,
            "instances": n.instances.iter().map(|i| json!({
                "cycle": i.cycle.coords(),
                "lineage": i.lineage,
            })).collect::<Vec<_>>(),
            "families": n.families.iter().map(|fam| fam.family.dimension()).collect::<Vec<_>>(),
        }));
    }
    let (ctext, checks, _) = checks_report(&s, &f)?;
    text.push_str(&ctext);
    Ok(Report {
        command: "figure-eval",
        text,
        json: json!({
            "metric": f.metric(),
            "arithmetic": f.mode(),
            "nodes": nodes,
            "checks": checks,
        }),
        svg: None,
        ok: !infeasible,
    })
}

fn figure_check(path: &Path, common: &Common) -> CliResult<Report> {
    let (s, f) = load_script(path, common)?;
    let (text, checks, ok) = checks_report(&s, &f)?;
    Ok(Report {
        command: "figure-check",
        text,
        json: json!({ "checks": checks, "all_hold": ok }),
        svg: None,
        ok,
    })
}

fn figure_render(path: &Path, view: &ViewArgs, common: &Common) -> CliResult<Report> {
    let (_, f) = load_script(path, common)?;
    let vp = viewport(view, |w| render::figure_viewport(&f, w))?;
    let svg = render::render_figure(&f, &vp)?;
    Ok(Report {
        command: "figure-render",
        text: svg.clone(),
        json: json!({ "svg": svg }),
        svg: Some(svg),
        ok: true,
    })
}

fn contfrac(cf: &str, arrangement: Arrangement, steps: Option<usize>, svg: Option<&Path>, view: &ViewArgs) -> CliResult<Report> {
    let cf: ContinuedFraction = cf.parse()?;
    let n = steps.unwrap_or(cf.len());
    let states = cf.convergents(n)?;
    let ch = chain(&cf, n, arrangement)?;
    let ss = seidel_stern_check(&ch.connecting(), SEIDEL_STERN_THRESHOLD)?;
    let holds = ch.holds(eps_cmp());
    let mut text = format!("{cf}\narrangement {arrangement}\n");
    for s in &states {
        text.push_str(&format!("p{0}/q{0} = {1}/{2} = {3}\n", s.n, s.p, s.q, s.quotient()));
    }
    for st in &ch.steps {
        text.push_str(&format!(
            "step {} first {} second {} connecting {} residual {}\n",
            st.state.n, st.first, st.second, st.connecting, st.pair_residual
        ));
    }
    let verdict = match ss.converges {
        Some(true) => "converges",
        Some(false) => "does not converge",
        None => "no verdict",
    };
    text.push_str(&format!("chain relations hold: {holds}\nseidel-stern: {verdict}\n"));
    let picture = match svg {
        Some(p) => {
            let vp = viewport(view, |w| render::chain_viewport(&ch, w))?;
            let doc = render::render_chain(&ch, &vp)?;
            write(p, &doc)?;
            Some(doc)
        }
        None => None,
    };
    Ok(Report {
        command: "contfrac",
        text,
        json: json!({
            "cf": cf.to_string(),
            "arrangement": arrangement,
            "convergents": states.iter().map(|s| json!({"n": s.n, "p": s.p, "q": s.q})).collect::<Vec<_>>(),
            "steps": ch.steps.iter().map(|st| json!({
                "n": st.state.n,
                "first": st.first.coords(),
                "second": st.second.coords(),
                "connecting": st.connecting.coords(),
                "residual": st.pair_residual,
                "degenerate": st.degenerate,
            })).collect::<Vec<_>>(),
            "holds": holds,
            "seidel_stern": {"nested": ss.nested, "radii": ss.radii, "converges": ss.converges},
        }),
        svg: picture,
        ok: holds,
    })
}

fn triple(points: &[String]) -> CliResult<[(RealPoint, RealPoint); 3]> {
    let p = points.iter().map(|t| t.parse::<RealPoint>()).collect::<Result<Vec<_>, _>>()?;
    Ok([(p[0].clone(), p[1].clone()), (p[2].clone(), p[3].clone()), (p[4].clone(), p[5].clone())])
}

fn poincare(op: &PoincareOp) -> CliResult<Report> {
    match op {
        PoincareOp::Classify { points } => {
            let c = classify_triple_of_intervals(&triple(points)?)?;
            let kind = serde_json::to_value(c.kind).expect("kind serialises");
            Ok(Report {
                command: "poincare classify",
                text: format!("{}\ndiscriminant {}\nmap {}\n", kind.as_str().unwrap_or_default(), c.discriminant, c.map),
                json: json!({ "kind": kind, "discriminant": c.discriminant, "map": c.map.entries() }),
                svg: None,
                ok: true,
            })
        }
        PoincareOp::Extend { points } => {
            let e = extension_from_triple(&triple(points)?)?;
            let kind = serde_json::to_value(e.kind).expect("kind serialises");
            let point = e.point().map(|(u, v)| vec![u, v]);
            let shown = point.as_ref().map_or("none".to_string(), |p| format!("({}, {})", p[0], p[1]));
            Ok(Report {
                command: "poincare extend",
                text: format!("{}\npoint {shown}\nform {}\n", kind.as_str().unwrap_or_default(), e.form),
                json: json!({ "kind": kind, "point": point, "form": e.form.coords(), "conjugator": e.conjugator.entries() }),
                svg: None,
                ok: true,
            })
        }
        PoincareOp::Iwasawa { g } => {
            let v = g.iter().map(|t| Scalar::parse_exact(t)).collect::<Result<Vec<_>, _>>()?;
            let g = Sl2::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())?;
            let d = iwasawa(&g)?;
            let back = d.a.mul(&d.n).mul(&d.k).to_f64();
            let err = g.to_f64().iter().zip(back).fold(0f64, |m, (x, y)| m.max((x - y).abs()));
            Ok(Report {
                command: "poincare iwasawa",
                text: format!("A {}\nN {}\nK {}\nreconstruction error {err:e}\n", d.a, d.n, d.k),
                json: json!({ "a": d.a.entries(), "n": d.n.entries(), "k": d.k.entries(), "error": err }),
                svg: None,
                ok: true,
            })
        }
    }
}

fn point2(text: &str) -> CliResult<Vec<Scalar>> {
    scalars(text, 2)
}

fn random_triangle(rng: &mut ChaCha8Rng) -> [Vec<Scalar>; 3] {
    [0, 1, 2].map(|_| {
        (0..2)
            .map(|_| Scalar::ratio(rng.gen_range(-20..20), rng.gen_range(1..5)))
            .collect()
    })
}

fn ninepoint(
    triangle: &[String],
    n: &str,
    random: Option<usize>,
    svg: Option<&Path>,
    view: &ViewArgs,
    common: &Common,
) -> CliResult<Report> {
    let metric = common.metric.clone().unwrap_or_else(Metric::elliptic);
    let n = match n.trim() {
        "inf" | "infinity" => None,
        t => Some(point2(t)?),
    };
    if let Some(k) = random {
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        let (mut passed, mut skipped, mut done) = (0usize, 0usize, 0usize);
        let mut failures = vec![];
        while done < k {
            if skipped > 100 * k.max(1) {
                return Err(Failure::Engine(Error::Degenerate("too many degenerate samples".into())));
            }
            let v = random_triangle(&mut rng);
            match nine_point_figure(v.clone(), n.clone(), metric.clone()) {
                Ok(np) => {
                    done += 1;
                    if np.verdict() {
                        passed += 1;
                    } else {
                        failures.push(v.iter().map(|p| format!("{},{}", p[0], p[1])).collect::<Vec<_>>());
                    }
                }
                Err(Error::Degenerate(_)) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
        return Ok(Report {
            command: "ninepoint",
            text: format!("metric {metric} seed {}\n{passed}/{k} triangles verified, {skipped} degenerate samples skipped\n", common.seed),
            json: json!({ "metric": metric, "seed": common.seed, "triangles": k, "verified": passed, "skipped": skipped, "failures": failures }),
            svg: None,
            ok: passed == k,
        });
    }
    if triangle.len() != 3 {
        return Err(Failure::Input("give --triangle A B C or --random K".into()));
    }
    let v = [point2(&triangle[0])?, point2(&triangle[1])?, point2(&triangle[2])?];
    let np = nine_point_figure(v, n, metric.clone())?;
    let (centre, r2) = np.conic.center_radius(&metric)?;
    let mut text = format!("verdict {}\nconic {}\ncentre ({}, {}) radius^2 {}\n", np.verdict(), np.conic, centre[0], centre[1], r2);
    for (p, ok) in &np.incidences {
        text.push_str(&format!("{p} {ok}\n"));
    }
    let picture = match svg {
        Some(path) => {
            let vp = viewport(view, |w| render::figure_viewport(&np.figure, w))?;
            let mut only: Vec<&str> = vec!["A", "B", "C", "AB", "BC", "CA", "nine"];
            only.extend(NINE);
            let doc = render::render_nodes(&np.figure, &vp, Some(&only))?;
            write(path, &doc)?;
            Some(doc)
        }
        None => None,
    };
    Ok(Report {
        command: "ninepoint",
        text,
        json: json!({
            "metric": metric,
            "verdict": np.verdict(),
            "conic": np.conic.coords(),
            "centre": centre,
            "radius_sq": r2,
            "incidences": np.incidences.iter().map(|(p, ok)| json!({"point": p, "holds": ok})).collect::<Vec<_>>(),
        }),
        svg: picture,
        ok: np.verdict(),
    })
}

fn sign_options(c: char) -> CliResult<Vec<TangentSign>> {
    match c {
        '+' => Ok(vec![TangentSign::Plus]),
        '-' => Ok(vec![TangentSign::Minus]),
        '*' => Ok(vec![TangentSign::Both]),
        _ => Err(Failure::Input(format!("bad tangency sign `{c}`"))),
    }
}

fn sign_char(s: TangentSign) -> char {
    match s {
        TangentSign::Plus => '+',
        TangentSign::Minus => '-',
        TangentSign::Both => '*',
    }
}

fn apollonius(cycles: &[String], signs: &str, split: bool, common: &Common) -> CliResult<Report> {
    let metric = common.metric.clone().unwrap_or_else(Metric::elliptic);
    let mode: ArithMode = common.arith.map_or(ArithMode::Exact, Into::into);
    if cycles.len() != 3 {
        return Err(Failure::Input(format!("need three --cycle values, got {}", cycles.len())));
    }
    let given = cycles
        .iter()
        .map(|t| {
            let v = scalars(t, 4)?;
            Ok(Cycle::new_2d(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())?.to_mode(mode))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let chars: Vec<char> = signs.chars().collect();
    if chars.len() != 3 {
        return Err(Failure::Input(format!("--signs needs three characters, got `{signs}`")));
    }
    let mut per_cycle = chars.iter().map(|&c| sign_options(c)).collect::<CliResult<Vec<_>>>()?;
    if split {
        for opts in &mut per_cycle {
            if opts == &[TangentSign::Both] {
                *opts = vec![TangentSign::Plus, TangentSign::Minus];
            }
        }
    }
    let mut branches = vec![];
    for &s0 in &per_cycle[0] {
        for &s1 in &per_cycle[1] {
            for &s2 in &per_cycle[2] {
                branches.push([s0, s1, s2]);
            }
        }
    }
    let mut text = String::new();
    let mut out = vec![];
    let mut found = 0;
    for b in branches {
        let tag: String = b.iter().map(|&s| sign_char(s)).collect();
        let rels: Vec<Relation<Cycle>> = given
            .iter()
            .zip(b)
            .map(|(c, sign)| Relation::IsTangent { to: c.clone(), sign })
            .collect();
        let res = solve(&rels, &metric, mode)?;
        let mut sols = vec![];
        match &res.solutions {
            SolutionSet::Infeasible(why) => text.push_str(&format!("branch {tag}: infeasible ({why})\n")),
            SolutionSet::Parametric { families, .. } => {
                text.push_str(&format!("branch {tag}: {} parametric families\n", families.len()))
            }
            SolutionSet::Finite(_) => {}
        }
        for c in res.solutions.instances() {
            let mut worst = 0f64;
            for (g, sign) in given.iter().zip(b) {
                let chk = check_relation(&Relation::IsTangent { to: (), sign }, c, g, &metric, eps_cmp())?;
                worst = worst.max(chk.residual.to_f64().abs());
            }
            let curvature = match c.center_radius(&metric) {
                Ok((_, r2)) if r2.to_f64() > 0.0 => Some(1.0 / r2.to_f64().sqrt()),
                _ => None,
            };
            text.push_str(&format!("branch {tag}: {c} residual {worst:e}"));
            if let Some(k) = curvature {
                text.push_str(&format!(" curvature {k}"));
            }
            text.push('\n');
            sols.push(json!({ "cycle": c.coords(), "residual": worst, "curvature": curvature }));
        }
        found += sols.len();
        out.push(json!({
            "signs": tag,
            "status": match &res.solutions {
                SolutionSet::Finite(_) => "finite",
                SolutionSet::Parametric { .. } => "parametric",
                SolutionSet::Infeasible(_) => "infeasible",
            },
            "demoted": res.demoted,
            "solutions": sols,
        }));
    }
    Ok(Report {
        command: "apollonius",
        text,
        json: json!({ "metric": metric, "arithmetic": mode, "branches": out }),
        svg: None,
        ok: found > 0,
    })
}

fn run(cli: &Cli) -> CliResult<Report> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::FigureEval { script } => figure_eval(script, c),
        Cmd::FigureCheck { script } => figure_check(script, c),
        Cmd::FigureRender { script, view } => figure_render(script, view, c),
        Cmd::Contfrac {
            cf,
            arrangement,
            steps,
            svg,
            view,
        } => contfrac(cf, *arrangement, *steps, svg.as_deref(), view),
        Cmd::Poincare { op } => poincare(op),
        Cmd::Ninepoint {
            triangle,
            n,
            random,
            svg,
            view,
        } => ninepoint(triangle, n, *random, svg.as_deref(), view, c),
        Cmd::Apollonius { cycles, signs, split } => apollonius(cycles, signs, *split, c),
    }
}

fn emit(report: &Report, common: &Common, default: Format) -> CliResult<()> {
    let body = match common.format.unwrap_or(default) {
        Format::Text => report.text.clone(),
        Format::Svg => report
            .svg
            .clone()
            .ok_or_else(|| Failure::Input(format!("{} has no picture; pass --svg or use figure-render", report.command)))?,
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": report.command,
                "ok": report.ok,
                "result": report.json,
            });
            serde_json::to_string_pretty(&doc).expect("report serialises") + "\n"
        }
    };
    match &common.out {
        Some(p) => write(p, &body),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Output(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("MOEBINV_EPS") {
        match v.parse::<f64>() {
            Ok(e) if e.is_finite() && e > 0.0 => set_eps_cmp(e),
            _ => {
                eprintln!("error: MOEBINV_EPS must be a positive number, got `{v}`");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }
    let default = match cli.cmd {
        Cmd::FigureRender { .. } => Format::Svg,
        _ => Format::Text,
    };
    let result = run(&cli).and_then(|r| emit(&r, &cli.common, default).map(|_| r.ok));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FALSE),
        Err(f) => {
            eprintln!("error: {}", message(&f));
            ExitCode::from(exit_code(&f))
        }
    }
}
