mod manifest;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use realbloch::cohomology::{
    classification_table, h_space_range, rz2_line_bundles_s1, z2_cw_cells, Coefficients, Space, DEFAULT_KMAX,
};
use realbloch::geometry::{Grid, GridSpec, Vec5};
use realbloch::golden::{self, classification_layout, Status};
use realbloch::invariants::{
    ai_consistency, collapse_pullback_check, compute_degree, orientation_coherence, second_chern_closed_form,
    second_chern_trace, AiGrids, DegreeMethod, DegreeQuery, FdScheme, InvariantReport, MapDescriptor,
    RegularValueOptions, Step, Verdict, REALITY_TOL,
};
use realbloch::ktables::{audit_table_b2, k_space, Flavor, KQuery, KSpace};
use realbloch::models::{equivariant_even_map, AnsatzMap, Band, JChoice, Model, SphereMap, DEFAULT_COLLAR};
use realbloch::projectors::{lazy, verify_real_structure};

use manifest::Recorder;
use output::{Artifact, Format, Table};

#[derive(Parser)]
#[command(name = "realbloch", version, about = "Invariants of Real (class AI) Bloch bundles")]
struct Cli {
    /// csv or json; tables default to csv, reports to json
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// write the artifact here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads; 1 is the bit-reproducible path
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// leave wall time out of the manifest
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic tables: cohomology, classification, K-theory
    #[command(subcommand)]
    Tables(TablesCmd),
    /// Numerical Chern numbers
    #[command(subcommand)]
    Invariant(InvariantCmd),
    /// Brouwer degree of a map
    Degree(DegreeArgs),
    /// Symmetry and consistency checks; exit 2 when the mathematics disagrees
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Point,
    TrSphere,
    TrTorus,
    Sphere,
    Torus,
    AntipodalSphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum KSpaceArg {
    Point,
    TrCircle,
    TrTorus,
    TrSphere,
    Torus,
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Kr,
    Ko,
    K,
}

#[derive(Clone, Copy, ValueEnum)]
enum BandArg {
    Plus,
    Minus,
}

impl From<BandArg> for Band {
    fn from(b: BandArg) -> Band {
        match b {
            BandArg::Plus => Band::Plus,
            BandArg::Minus => Band::Minus,
        }
    }
}

#[derive(Subcommand)]
enum TablesCmd {
    /// The d ≤ 4 classification of complex and Real bundles
    Classification,
    /// Equivariant cohomology H^k(X, Z(m)) for k = 0..=kmax
    Cohomology {
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, default_value_t = 0)]
        d: u32,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        twist: u8,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: i64,
    },
    /// Fixed and free cells of the Z2-CW structure
    Cells {
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long)]
        d: u32,
    },
    /// A KR/KO/K group in degree −j
    K {
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        #[arg(long, value_enum)]
        space: KSpaceArg,
        #[arg(long, default_value_t = 0)]
        d: u32,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        j: i64,
        #[arg(long)]
        reduced: bool,
    },
    /// Recursion against the published KR torus row
    KAudit,
    /// (R, Z2) line bundles over the TR circle
    LineBundles,
}

#[derive(Clone, Copy, ValueEnum)]
enum C2Method {
    Trace,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Chart,
    Torus,
}

#[derive(Args)]
struct ModelArgs {
    /// builtin (hopf, standard-ansatz, even-map:<n>, constant) or a JSON config file
    #[arg(long)]
    model: String,
    #[arg(long, value_enum, default_value = "plus")]
    band: BandArg,
}

#[derive(Subcommand)]
enum InvariantCmd {
    /// Second Chern number of a band projector
    C2 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "trace")]
        method: C2Method,
        /// points per axis
        #[arg(long, default_value_t = 48)]
        grid: usize,
        /// chart half-width L
        #[arg(long = "box", default_value_t = 12.0)]
        half_width: f64,
        #[arg(long, value_enum, default_value = "chart")]
        domain: Domain,
        #[command(flatten)]
        fd: FdArgs,
        /// coarser grids to run first, e.g. 32,40; the report carries the history
        #[arg(long, value_delimiter = ',')]
        refine: Vec<usize>,
    },
}

#[derive(Args)]
struct FdArgs {
    /// finite-difference order, 2 or 4
    #[arg(long, default_value_t = 4)]
    fd_order: u8,
    /// auto (lattice on tori, fixed on charts), lattice, or a step in κ
    #[arg(long, default_value = "auto")]
    fd_step: String,
}

impl FdArgs {
    fn scheme(&self) -> Result<FdScheme> {
        let step = match self.fd_step.as_str() {
            "auto" => Step::Auto,
            "lattice" => Step::Lattice,
            h => Step::Fixed(h.parse().with_context(|| format!("--fd-step takes auto, lattice or a number, got {h:?}"))?),
        };
        Ok(FdScheme::new(self.fd_order, step)?)
    }
}

#[derive(Args)]
struct DegreeArgs {
    /// identity, power:<n>, ansatz, even:<n>, collapse
    #[arg(long)]
    map: String,
    /// cartan, regular-value, volume
    #[arg(long, default_value = "regular-value")]
    method: String,
    /// points per axis of the integration grid
    #[arg(long)]
    grid: Option<usize>,
    /// chart half-width
    #[arg(long = "box")]
    half_width: Option<f64>,
    /// regular value, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    target: Option<Vec<f64>>,
    #[command(flatten)]
    rv: RvArgs,
    /// collar width of the doubling construction
    #[arg(long, default_value_t = DEFAULT_COLLAR)]
    collar: f64,
}

#[derive(Args)]
struct RvArgs {
    /// Newton seeds
    #[arg(long)]
    seeds: Option<usize>,
    /// RNG seed for the Newton starts
    #[arg(long)]
    seed: Option<u64>,
    /// preimage deduplication radius
    #[arg(long)]
    dedup: Option<f64>,
    /// smallest admissible |det J|
    #[arg(long)]
    regularity: Option<f64>,
}

impl RvArgs {
    fn options(&self) -> RegularValueOptions {
        let d = RegularValueOptions::default();
        RegularValueOptions {
            seeds: self.seeds.unwrap_or(d.seeds),
            rng_seed: self.seed.unwrap_or(d.rng_seed),
            dedup_radius: self.dedup.unwrap_or(d.dedup_radius),
            regularity: self.regularity.unwrap_or(d.regularity),
            ..d
        }
    }
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Necessary class-AI conditions: Real structure, c1 on fixed-point slices, even C2
    Ai {
        #[command(flatten)]
        model: ModelArgs,
        /// points per axis of the C2 grid
        #[arg(long, default_value_t = 48)]
        grid: usize,
        /// chart half-width, with --domain chart
        #[arg(long = "box", default_value_t = 12.0)]
        half_width: f64,
        /// torus: C2 of the collapse pullback
        #[arg(long, value_enum, default_value = "torus")]
        domain: Domain,
        #[command(flatten)]
        fd: FdArgs,
        /// torus points per axis for the Real-structure check
        #[arg(long, default_value_t = 17)]
        torus_n: usize,
        #[arg(long, default_value_t = 32)]
        slice_n: usize,
    },
    /// J conj(P(k)) J* = P(ι(k)) on a torus grid
    Real {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 17)]
        torus_n: usize,
        /// override the model's J (1, S0..S4)
        #[arg(long)]
        j: Option<String>,
    },
    /// C2 on S^4 against C2 of the collapse pullback on T^4
    Collapse {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long = "box", default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 32)]
        torus_n: usize,
    },
    /// Degrees of the doubling reflections and their compositions with a map
    Coherence {
        /// ansatz or even:<n>
        #[arg(long, default_value = "ansatz")]
        map: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        target: Option<Vec<f64>>,
        #[command(flatten)]
        rv: RvArgs,
    },
    /// Published examples and acceptance criteria
    Golden {
        /// include the expensive numerical criteria
        #[arg(long)]
        full: bool,
        /// run only these criteria (1..=10)
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u8>,
    },
}

struct Done {
    artifact: Artifact,
    /// verification disagreed
    failed: bool,
}

impl Done {
    fn ok(artifact: Artifact) -> Self {
        Done { artifact, failed: false }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot size the thread pool")?;
    }
    let argv: Vec<String> = std::env::args().collect();
    let mut rec = Recorder::new(argv, rayon::current_num_threads(), !cli.no_timing);
    let done = match cli.command {
        Command::Tables(t) => Done::ok(tables(t)?),
        Command::Invariant(InvariantCmd::C2 { model, method, grid, half_width, domain, fd, refine }) => {
            let m = load_model(&model.model, &mut rec)?;
            let fd = fd.scheme()?;
            let mut runs = Vec::new();
            for n in refine.into_iter().chain([grid]) {
                let spec = match domain {
                    Domain::Chart => GridSpec::chart(4, half_width, n),
                    Domain::Torus => GridSpec::torus(4, n),
                };
                rec.grid(spec);
                runs.push(c2(&m, model.band.into(), method, spec, &fd)?);
            }
            let r = InvariantReport::refined(runs).expect("at least one run").with("model", m.name());
            Done::ok(Artifact::report(&r)?.with_csv(report_row(&r)))
        }
        Command::Degree(a) => Done::ok(degree(a, &mut rec)?),
        Command::Verify(v) => verify(v, &mut rec, cli.no_timing)?,
    };
    let target = cli.out.as_deref();
    rec.output(target.map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into()));
    let text = output::render(&done.artifact, cli.format, &rec.finish())?;
    output::write(&text, target)?;
    Ok(!done.failed)
}

fn load_model(arg: &str, rec: &mut Recorder) -> Result<Model> {
    let path = Path::new(arg);
    if path.is_file() {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read model file {arg}"))?;
        rec.config(&bytes);
        let text = String::from_utf8(bytes).context("model file is not UTF-8")?;
        return Model::from_json(&text).with_context(|| format!("malformed model file {arg}"));
    }
    if arg.ends_with(".json") {
        bail!("model file {arg} does not exist");
    }
    Ok(Model::builtin(arg)?)
}

fn c2(m: &Model, band: Band, method: C2Method, spec: GridSpec, fd: &FdScheme) -> Result<InvariantReport> {
    let grid = Grid::new(spec)?;
    Ok(match method {
        C2Method::Trace => {
            let p = if grid.is_chart() { m.chart_projector(band)? } else { m.torus_projector(band)? };
            second_chern_trace(&lazy(grid, 2, p), fd)?
        }
        C2Method::ClosedForm => {
            let f = m
                .coefficient_map()
                .with_context(|| format!("the closed form needs a coefficient model; {} has none", m.name()))?;
            if !grid.is_chart() {
                bail!("the closed form is evaluated on the chart; use --domain chart");
            }
            second_chern_closed_form(&f, band, &grid)?
        }
    })
}

fn report_row(r: &InvariantReport) -> Table {
    let mut t = Table::new(&["quantity", "method", "grid", "value", "nearest_integer", "residual"]);
    for s in &r.refinement {
        t.push(vec![
            r.quantity.clone(),
            r.method.clone(),
            s.grid.to_string(),
            format!("{:.12}", s.value),
            format!("{}", s.value.round()),
            format!("{:.3e}", s.residual),
        ]);
    }
    if r.refinement.is_empty() {
        t.push(vec![
            r.quantity.clone(),
            r.method.clone(),
            String::new(),
            format!("{:.12}", r.value),
            r.nearest_integer.to_string(),
            format!("{:.3e}", r.residual),
        ]);
    }
    t
}

fn space(s: SpaceArg, d: u32) -> Space {
    match s {
        SpaceArg::Point => Space::Point,
        SpaceArg::TrSphere => Space::TrSphere(d),
        SpaceArg::TrTorus => Space::TrTorus(d),
        SpaceArg::Sphere => Space::Sphere(d),
        SpaceArg::Torus => Space::Torus(d),
        SpaceArg::AntipodalSphere => Space::AntipodalSphere(d),
    }
}

fn tables(t: TablesCmd) -> Result<Artifact> {
    match t {
        TablesCmd::Classification => {
            let layout = classification_layout().context("classification depends on the rank below d = 4")?;
            let mut table = Table::new(&["vb", "azc", "d1", "d2", "d3", "d4_m1", "d4_m2"]);
            for row in layout {
                table.push(row.to_vec());
            }
            Artifact::table(&classification_table(), table)
        }
        TablesCmd::Cohomology { space: s, d, twist, kmax } => {
            let x = space(s, d);
            let c = Coefficients::new(twist as i64);
            let groups = h_space_range(x, kmax, c)?;
            let mut table = Table::new(&["space", "coefficients", "k", "group"]);
            for (k, g) in groups.iter().enumerate() {
                table.push(vec![x.to_string(), c.to_string(), k.to_string(), g.to_string()]);
            }
            let json = serde_json::json!({ "space": x, "coefficients": c.to_string(), "groups": groups });
            Artifact::table(&json, table)
        }
        TablesCmd::Cells { space: s, d } => {
            let x = space(s, d);
            let cells = z2_cw_cells(x)?;
            let mut table = Table::new(&["space", "dim", "fixed", "free"]);
            for c in &cells {
                table.push(vec![x.to_string(), c.dim.to_string(), c.fixed.to_string(), c.free.to_string()]);
            }
            Artifact::table(&cells, table)
        }
        TablesCmd::K { flavor, space: s, d, j, reduced } => {
            let flavor = match flavor {
                FlavorArg::Kr => Flavor::KR,
                FlavorArg::Ko => Flavor::KO,
                FlavorArg::K => Flavor::K,
            };
            let s = match s {
                KSpaceArg::Point => KSpace::Point,
                KSpaceArg::TrCircle => KSpace::TrCircle,
                KSpaceArg::TrTorus => KSpace::TrTorus(d),
                KSpaceArg::TrSphere => KSpace::TrSphere(d),
                KSpaceArg::Torus => KSpace::Torus(d),
                KSpaceArg::Sphere => KSpace::Sphere(d),
            };
            let q = KQuery::new(flavor, s, j, reduced);
            let g = k_space(q)?;
            let mut table = Table::new(&["flavor", "space", "j", "reduced", "group"]);
            table.push(vec![flavor.to_string(), s.to_string(), j.to_string(), reduced.to_string(), g.to_string()]);
            Artifact::table(&serde_json::json!({ "query": q, "group": g }), table)
        }
        TablesCmd::KAudit => {
            let a = audit_table_b2();
            let mut table = Table::new(&["d", "recursion", "printed", "status"]);
            for r in &a.rows {
                table.push(vec![r.d.to_string(), r.recursion.to_string(), r.printed.to_string(), r.status.clone()]);
            }
            Ok(Artifact::report(&a)?.with_csv(table))
        }
        TablesCmd::LineBundles => {
            let lb = rz2_line_bundles_s1();
            let mut table = Table::new(&["label", "rep_at_0", "rep_at_pi", "realification"]);
            for e in &lb.elements {
                let v = serde_json::to_value(e)?;
                let rep = |i: usize| v["fixed_point_reps"][i].as_str().unwrap_or_default().to_string();
                let real = v["realification"].as_str().unwrap_or_default().to_string();
                table.push(vec![e.label.clone(), rep(0), rep(1), real]);
            }
            Artifact::table(&lb, table)
        }
    }
}

fn degree(a: DegreeArgs, rec: &mut Recorder) -> Result<Artifact> {
    let map: MapDescriptor = a.map.parse()?;
    let method: DegreeMethod = a.method.parse()?;
    let mut q = DegreeQuery::new(map, method);
    q.target = a.target;
    q.options = a.rv.options();
    q.collar = a.collar;
    if method != DegreeMethod::RegularValue {
        let spec = match q.default_grid() {
            GridSpec::Chart { dim, half_width, n } => {
                GridSpec::chart(dim, a.half_width.unwrap_or(half_width), a.grid.unwrap_or(n))
            }
            GridSpec::Torus { dim, n } => GridSpec::torus(dim, a.grid.unwrap_or(n)),
            GridSpec::S3Angles { n_theta, n_phi, n_psi } => match a.grid {
                Some(n) => GridSpec::s3(n, n, n),
                None => GridSpec::s3(n_theta, n_phi, n_psi),
            },
        };
        rec.grid(spec);
        q.grid = Some(spec);
    }
    let r = compute_degree(&q)?;
    Ok(Artifact::report(&r)?.with_csv(report_row(&r)))
}

fn generic_s4() -> Vec5 {
    let y = [0.13, 0.47, -0.61, 0.38, -0.5];
    let n = y.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    y.map(|v| v / n)
}

fn verify(v: VerifyCmd, rec: &mut Recorder, no_timing: bool) -> Result<Done> {
    Ok(match v {
        VerifyCmd::Ai { model, grid, half_width, domain, fd, torus_n, slice_n } => {
            let m = load_model(&model.model, rec)?;
            let c2 = match domain {
                Domain::Chart => GridSpec::chart(4, half_width, grid),
                Domain::Torus => GridSpec::torus(4, grid),
            };
            let grids = AiGrids { reality: GridSpec::torus(4, torus_n), slice_n, c2, fd: fd.scheme()? };
            rec.grid(grids.reality);
            rec.grid(GridSpec::torus(4, slice_n));
            rec.grid(grids.c2);
            let r = ai_consistency(&m, model.band.into(), &grids)?;
            if r.verdict == Verdict::NotApplicable {
                eprintln!("note: {}", r.reason);
            }
            Done { failed: r.verdict == Verdict::Inconsistent, artifact: Artifact::report(&r)? }
        }
        VerifyCmd::Real { model, torus_n, j } => {
            let m = load_model(&model.model, rec)?;
            let j = match j {
                Some(s) => JChoice::parse(&s)?,
                None => m.symmetry().unwrap_or(JChoice::One),
            };
            let spec = GridSpec::torus(4, torus_n);
            rec.grid(spec);
            let field = lazy(Grid::new(spec)?, 2, m.torus_projector(model.band.into())?);
            let r = verify_real_structure(&field, m.real_involution(), j)?;
            Done { failed: r.max_deviation > REALITY_TOL, artifact: Artifact::report(&r)? }
        }
        VerifyCmd::Collapse { model, grid, half_width, torus_n } => {
            let m = load_model(&model.model, rec)?;
            let (chart, torus) = (GridSpec::chart(4, half_width, grid), GridSpec::torus(4, torus_n));
            rec.grid(chart);
            rec.grid(torus);
            let r = collapse_pullback_check(&m, model.band.into(), chart, torus)?;
            Done { failed: !r.agree, artifact: Artifact::report(&r)? }
        }
        VerifyCmd::Coherence { map, target, rv } => {
            let phi: Box<dyn SphereMap> = match map.parse::<MapDescriptor>()? {
                MapDescriptor::Ansatz => Box::new(AnsatzMap { band: Band::Plus }),
                MapDescriptor::Even(n) => equivariant_even_map(n, DEFAULT_COLLAR)?,
                other => bail!("coherence is checked for ansatz or even:<n>, not {other}"),
            };
            let y = match target {
                None => generic_s4(),
                Some(t) => {
                    let y: Vec5 = t.as_slice().try_into().context("--target needs 5 components")?;
                    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if n == 0.0 {
                        bail!("--target must be non-zero");
                    }
                    y.map(|v| v / n)
                }
            };
            let r = orientation_coherence(phi.as_ref(), &y, &rv.options())?;
            Done { failed: !r.coherent, artifact: Artifact::report(&r)? }
        }
        VerifyCmd::Golden { full, criterion } => {
            let mut outcomes = if criterion.is_empty() {
                golden::suite(full)
            } else {
                let mut v = Vec::new();
                for n in criterion {
                    v.push(golden::criterion(n).with_context(|| format!("no criterion {n}; use 1..=10"))?);
                }
                v
            };
            if no_timing {
                outcomes.iter_mut().for_each(|o| o.seconds = 0.0);
            }
            let mut table = Table::new(&["id", "status", "seconds", "title", "detail"]);
            for o in &outcomes {
                let status = serde_json::to_value(o.status)?.as_str().unwrap_or_default().to_string();
                table.push(vec![o.id.clone(), status, format!("{:.2}", o.seconds), o.title.clone(), o.detail.clone()]);
            }
            let failed = outcomes.iter().any(|o| o.status == Status::Fail);
            Done { failed, artifact: Artifact::report(&outcomes)?.with_csv(table) }
        }
    })
}
