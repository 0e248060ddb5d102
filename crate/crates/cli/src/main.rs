use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spinroute::compiler::{
    calibrate_star, commutator_report, compile_entangler, schedule_multi, schedule_multi_1d, NetworkRouter, Packet,
    PrototypeRouter, TransportPulse,
};
use spinroute::dynamics::{run_schedule, PulseSchedule, Sector};
use spinroute::io::{read_json, write_json, Network, NetworkFile, RouteReport, StateDump};
use spinroute::net::{
    build_prototype_1d, build_star_block, lambda_basis_1d, tile_network, Coord, LatticeKind, LatticeSpec, Side,
};
use spinroute::state::fidelity_up_to_phase;
use spinroute::verify::{check_star_reflection, direct_sum_residual, percolation_estimate, FaultMap};
use spinroute::{Error, SiteId};

#[derive(Parser)]
#[command(name = "spinroute", version, about = "Perfect routing on regular XX spin networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network and write it as JSON.
    Build(BuildArgs),
    /// Compile a verified route (or several concurrent ones).
    Route(RouteArgs),
    /// Run a schedule on a network.
    Simulate(SimulateArgs),
    /// Check structural identities.
    Verify(VerifyArgs),
    /// Site percolation spanning frequency.
    Percolate(PercolateArgs),
    /// Phase program creating an entangled pair of ports in one block.
    Entangle(EntangleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeArg {
    Prototype,
    Chain,
    Square,
    Triangular,
    Cubic,
}

fn odd_chain_length(s: &str) -> Result<usize, String> {
    let m: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if m < 5 || m % 2 == 0 {
        return Err(format!("chain length must be odd and at least 5, got {m}"));
    }
    Ok(m)
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    lattice: LatticeArg,
    /// Blocks per axis, comma separated; diamond count for the prototype.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    extent: Vec<usize>,
    #[arg(long, value_parser = odd_chain_length, default_value = "5")]
    chain_length: usize,
    /// Wrap the lattice into a torus.
    #[arg(long)]
    periodic: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long)]
    net: PathBuf,
    /// Source site; repeat together with --to for concurrent packets.
    #[arg(long = "from", required = true)]
    from: Vec<String>,
    #[arg(long = "to", required = true)]
    to: Vec<String>,
    /// Faulty blocks, e.g. `1,1;0,2`.
    #[arg(long)]
    faults: Option<String>,
    /// Schedule output file.
    #[arg(long, short)]
    out: PathBuf,
    /// Report output file; printed when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    sched: PathBuf,
    /// Initially excited site; repeat for several excitations.
    #[arg(long, required = true)]
    input: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Site(s) to compare the final state with.
    #[arg(long)]
    target: Vec<String>,
    /// Final state dump.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    Prototype,
    Star,
    Tiling,
    Commutator,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
}

#[derive(Args)]
struct PercolateArgs {
    #[arg(long, value_enum)]
    lattice: LatticeArg,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Overridden by SPINROUTE_SEED.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EntangleArgs {
    #[arg(long, value_parser = odd_chain_length, default_value = "5")]
    chain_length: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn lattice_kind(l: LatticeArg) -> anyhow::Result<LatticeKind> {
    Ok(match l {
        LatticeArg::Chain => LatticeKind::Chain,
        LatticeArg::Square => LatticeKind::Square,
        LatticeArg::Triangular => LatticeKind::Triangular,
        LatticeArg::Cubic => LatticeKind::Cubic,
        LatticeArg::Prototype => bail!("the prototype is not a lattice"),
    })
}

fn emit(value: &Value, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => write_json(p, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> anyhow::Result<()> {
    let net = match a.lattice {
        LatticeArg::Prototype => {
            let [n] = a.extent[..] else {
                bail!("the prototype takes a single diamond count");
            };
            Network::Prototype(spinroute::net::Prototype::new(n)?)
        }
        l => {
            let kind = lattice_kind(l)?;
            let spec = if a.periodic {
                LatticeSpec::periodic(kind, a.extent.clone())?
            } else {
                LatticeSpec::new(kind, a.extent.clone())?
            };
            Network::Tiled(tile_network(&spec, &build_star_block(a.chain_length, kind.required_d())?)?)
        }
    };
    write_json(&a.out, &net.to_file())?;
    let g = net.graph();
    let blocks = match &net {
        Network::Tiled(t) => t.blocks().len(),
        Network::Prototype(p) => p.num_subsystems(),
        Network::Graph(_) => 1,
    };
    println!(
        "{}",
        json!({
            "sites": g.len(),
            "edges": g.edges().len(),
            "blocks": blocks,
            "max_abs_J": g.max_abs_coupling(),
            "min_abs_J": g.min_abs_coupling(),
            "uniform_modulus": g.max_abs_coupling() == g.min_abs_coupling(),
        })
    );
    Ok(())
}

fn parse_site(s: &str) -> anyhow::Result<SiteId> {
    s.parse::<SiteId>().with_context(|| format!("bad site `{s}`"))
}

fn parse_faults(spec: &LatticeSpec, s: Option<&str>) -> anyhow::Result<FaultMap> {
    let Some(s) = s else {
        return Ok(FaultMap::empty());
    };
    let coords = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let t = t.trim();
            let t = if t.starts_with('(') { t.to_string() } else { format!("({t})") };
            t.parse::<Coord>().map_err(anyhow::Error::from)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(FaultMap::new(spec, coords)?)
}

fn load_network(path: &PathBuf) -> anyhow::Result<Network> {
    let file: NetworkFile = read_json(path)?;
    Ok(file.load()?)
}

fn cmd_route(a: RouteArgs) -> anyhow::Result<()> {
    if a.from.len() != a.to.len() {
        bail!("--from and --to must be given the same number of times");
    }
    let src: Vec<SiteId> = a.from.iter().map(|s| parse_site(s)).collect::<anyhow::Result<_>>()?;
    let dst: Vec<SiteId> = a.to.iter().map(|s| parse_site(s)).collect::<anyhow::Result<_>>()?;
    let packets: Vec<Packet> = src
        .iter()
        .zip(&dst)
        .enumerate()
        .map(|(i, (s, d))| Packet::new(i, s.clone(), d.clone()))
        .collect();
    let net = load_network(&a.net)?;
    let (schedule, report) = match &net {
        Network::Prototype(p) => {
            if a.faults.is_some() {
                bail!("faults apply to tiled networks only");
            }
            let router = PrototypeRouter::new(p.graph())?;
            let cal = serde_json::to_value(router.calibration())?;
            if packets.len() > 1 {
                let ms = schedule_multi_1d(&router, &packets)?;
                multi_report(ms, cal)
            } else {
                let r = router.compile_route(&src[0], &dst[0], TransportPulse::Global)?;
                let path = match (r.src_port, r.dst_port) {
                    (Some(s), Some(d)) if s.owner <= d.owner => (s.owner..=d.owner).collect(),
                    (Some(s), Some(d)) => (d.owner..=s.owner).rev().collect(),
                    _ => vec![],
                };
                let report = RouteReport {
                    path: path.into_iter().map(|n: usize| vec![n as i32]).collect(),
                    duration: r.schedule.duration(),
                    fidelity: r.fidelity,
                    pulses: r.schedule.pulse_count(),
                    calibration: Some(cal),
                };
                (r.schedule, serde_json::to_value(report)?)
            }
        }
        Network::Tiled(t) => {
            let faults = parse_faults(t.spec(), a.faults.as_deref())?;
            let router = NetworkRouter::new(t.clone())?;
            let cal = serde_json::to_value(router.calibration())?;
            if packets.len() > 1 {
                let ms = schedule_multi(&router, &packets, &faults)?;
                multi_report(ms, cal)
            } else {
                let r = router.compile_route(&src[0], &dst[0], &faults)?;
                let report = RouteReport {
                    path: r.plan.path.iter().map(|c| c.0.clone()).collect(),
                    duration: r.duration,
                    fidelity: r.fidelity,
                    pulses: r.pulses,
                    calibration: Some(cal),
                };
                (r.schedule, serde_json::to_value(report)?)
            }
        }
        Network::Graph(_) => bail!("routing needs a prototype or tiled network file"),
    };
    write_json(&a.out, &schedule)?;
    emit(&report, a.report.as_ref())
}

fn multi_report(ms: spinroute::compiler::MultiSchedule, cal: Value) -> (PulseSchedule, Value) {
    let packets: Vec<Value> = ms
        .packets
        .iter()
        .map(|p| {
            json!({
                "id": p.packet.id,
                "from": p.packet.src,
                "to": p.packet.dst,
                "offset": p.offset,
                "padding": p.padding,
                "fidelity": p.fidelity,
            })
        })
        .collect();
    let report = json!({
        "packets": packets,
        "makespan": ms.makespan,
        "quantum": ms.quantum,
        "duration": ms.joint.duration(),
        "pulses": ms.joint.pulse_count(),
        "joint_fidelity": ms.joint_fidelity,
        "calibration": cal,
    });
    (ms.joint, report)
}

fn cmd_simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let net = load_network(&a.net)?;
    let sched: PulseSchedule = read_json(&a.sched)?;
    let inputs: Vec<SiteId> = a.input.iter().map(|s| parse_site(s)).collect::<anyhow::Result<_>>()?;
    let k = a.k.unwrap_or(inputs.len());
    if k != inputs.len() {
        bail!("--k {k} does not match {} input sites", inputs.len());
    }
    let sector = Sector::new(net.graph(), k)?;
    let out = run_schedule(&sector.excited(&inputs)?, &sched, &sector)?;
    let fidelity = if a.target.is_empty() {
        None
    } else {
        let targets: Vec<SiteId> = a.target.iter().map(|s| parse_site(s)).collect::<anyhow::Result<_>>()?;
        Some(fidelity_up_to_phase(&out, &sector.excited(&targets)?)?)
    };
    if let Some(p) = &a.out {
        write_json(p, &StateDump::from_state(&out))?;
    }
    emit(
        &json!({
            "k": k,
            "dim": sector.dim(),
            "duration": sched.duration(),
            "norm": out.norm(),
            "fidelity": fidelity,
        }),
        a.report.as_ref(),
    )
}

struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, suite: &str, name: String, value: f64, bound: f64) {
        self.0.push(json!({
            "suite": suite,
            "check": name,
            "value": value,
            "bound": bound,
            "pass": value < bound,
        }));
    }
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<bool> {
    let on = |s: Suite| a.suite == s || a.suite == Suite::All;
    let mut c = Checks(Vec::new());
    let mut notes = Vec::new();
    if on(Suite::Prototype) {
        for n in [1, 3, 8] {
            let g = build_prototype_1d(n)?;
            let r = direct_sum_residual(&g, &lambda_basis_1d(&g)?)?;
            c.add("prototype", format!("direct sum N={n}"), r, 1e-12);
        }
    }
    if on(Suite::Star) {
        for (m, d) in [(5, 2), (5, 3), (7, 2)] {
            let b = build_star_block(m, d)?;
            let cal = calibrate_star(&b)?;
            let r = check_star_reflection(&b, &cal)?;
            c.add("star", format!("reflection M={m} d={d}"), r.operator_residual, 1e-9);
            c.add("star", format!("phase cycle M={m} d={d}"), r.cycle_residual, 1e-12);
        }
    }
    if on(Suite::Tiling) {
        let spec = LatticeSpec::new(LatticeKind::Square, vec![2, 2])?;
        let net = tile_network(&spec, &build_star_block(5, 2)?)?;
        c.add("tiling", "direct sum 2x2 square".into(), direct_sum_residual(net.graph(), &net.v_pair_basis())?, 1e-12);
        let torus = tile_network(
            &LatticeSpec::periodic(LatticeKind::Triangular, vec![3, 3])?,
            &build_star_block(5, 3)?,
        )?;
        let g = torus.graph();
        c.add("tiling", "modulus spread M=5 d=3 torus".into(), g.max_abs_coupling() - g.min_abs_coupling(), 1e-15);
    }
    if on(Suite::Commutator) {
        for (m, d) in [(5, 2), (5, 3), (7, 2)] {
            let r = commutator_report(&build_star_block(m, d)?, 1, d)?;
            c.add("commutator", format!("off support M={m} d={d}"), r.off_support_residual, 1e-12);
            c.add("commutator", format!("form M={m} d={d}"), r.form_residual, 1e-12);
            notes.push(json!({
                "M": m,
                "d": d,
                "coefficient": r.coefficient,
                "nominal_coefficient": r.nominal_coefficient,
            }));
        }
    }
    let pass = c.0.iter().all(|v| v["pass"] == true);
    let mut out = json!({ "pass": pass, "checks": c.0 });
    if !notes.is_empty() {
        out["commutator_coefficients"] = Value::Array(notes);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(pass)
}

fn cmd_percolate(a: PercolateArgs) -> anyhow::Result<()> {
    let seed = match std::env::var("SPINROUTE_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Usage(format!("SPINROUTE_SEED `{s}` is not an unsigned integer")))?,
        Err(_) => a.seed,
    };
    let r = percolation_estimate(lattice_kind(a.lattice)?, a.size, a.p, a.trials, seed)?;
    println!("{}", serde_json::to_string(&r)?);
    Ok(())
}

fn cmd_entangle(a: EntangleArgs) -> anyhow::Result<()> {
    let block = build_star_block(a.chain_length, a.d)?;
    let (sched, target) = compile_entangler(&block)?;
    let sector = Sector::single(block.graph())?;
    let src = block.port(Side::Head, 1);
    let out = run_schedule(&sector.excited(std::slice::from_ref(&src))?, &sched, &sector)?;
    let fidelity = fidelity_up_to_phase(&out, &sector.state(target)?)?;
    if let Some(p) = &a.out {
        write_json(p, &sched)?;
    }
    println!(
        "{}",
        json!({
            "M": a.chain_length,
            "d": a.d,
            "from": src,
            "ports": [block.port(Side::Head, a.d), block.port(Side::Head, a.d / 2)],
            "duration": sched.duration(),
            "pulses": sched.pulse_count(),
            "fidelity": fidelity,
        })
    );
    Ok(())
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::NoRoute { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Route(a) => cmd_route(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a).and_then(|ok| if ok { Ok(()) } else { Err(anyhow!("verification failed")) }),
        Command::Percolate(a) => cmd_percolate(a),
        Command::Entangle(a) => cmd_entangle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
