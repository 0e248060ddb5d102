use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinroute::compiler::{
    calibrate_star, commutator_report, compile_1d_route, compile_entangler, compile_phase_program, port_coefficients,
    schedule_multi_1d, NetworkRouter, Packet, PrototypeRouter,
};
use spinroute::dynamics::{run_schedule, sector_hamiltonian, Sector, SpectralCache};
use spinroute::net::{
    build_prototype_1d, build_star_block, lambda_basis_1d, tile_network, BlockSite, Coord, CouplingGraph,
    LatticeKind, LatticeSpec, Side,
};
use spinroute::state::fidelity_up_to_phase;
use spinroute::verify::{check_star_reflection, direct_sum_residual, percolation_estimate, FaultMap};
use spinroute::SiteId;

fn report(n: usize, name: &str, ok: bool, detail: String) {
    println!("criterion {n:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Port pair a site is injected into on an N-diamond chain.
fn injection_pair(site: usize, n: usize) -> usize {
    if site == 1 {
        0
    } else if site == 3 * n + 1 {
        n - 1
    } else if site % 3 == 1 {
        (site - 1) / 3
    } else {
        (site - 2) / 3
    }
}

#[test]
fn c01_prototype_routing() {
    let n = 8;
    let start = Instant::now();
    let g = build_prototype_1d(n).unwrap();
    let supported: Vec<usize> = (1..=3 * n + 1)
        .filter(|s| !matches!(s, 2 | 3) && *s != 3 * n - 1 && *s != 3 * n)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 1.0;
    let mut law = true;
    for _ in 0..20 {
        let a = supported[rng.random_range(0..supported.len())];
        let b = loop {
            let b = supported[rng.random_range(0..supported.len())];
            if b != a {
                break b;
            }
        };
        let r = compile_1d_route(&g, &SiteId::Index(a), &SiteId::Index(b)).unwrap();
        worst = worst.min(r.fidelity);
        let hops = injection_pair(a, n).abs_diff(injection_pair(b, n));
        law &= r.transport.duration() == hops as f64 * FRAC_PI_2;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "1D perfect routing",
        1.0 - worst <= 1e-9 && law && secs < 5.0,
        format!("min fidelity {worst:.15}, duration law {law}, {secs:.2}s"),
    );
}

#[test]
fn c02_direct_sum() {
    let mut worst: f64 = 0.0;
    for n in [1, 3, 8] {
        let g = build_prototype_1d(n).unwrap();
        worst = worst.max(direct_sum_residual(&g, &lambda_basis_1d(&g).unwrap()).unwrap());
    }
    let net = tile_network(
        &LatticeSpec::new(LatticeKind::Square, vec![2, 2]).unwrap(),
        &build_star_block(5, 2).unwrap(),
    )
    .unwrap();
    let tiled = direct_sum_residual(net.graph(), &net.v_pair_basis()).unwrap();
    report(
        2,
        "direct-sum structure",
        worst < 1e-12 && tiled < 1e-12,
        format!("prototype residual {worst:.3e}, 2x2 square residual {tiled:.3e}"),
    );
}

#[test]
fn c03_star_identities() {
    let mut op: f64 = 0.0;
    let mut cyc: f64 = 0.0;
    for (m, d) in [(5, 2), (5, 3), (7, 2)] {
        let b = build_star_block(m, d).unwrap();
        let r = check_star_reflection(&b, &calibrate_star(&b).unwrap()).unwrap();
        op = op.max(r.operator_residual);
        cyc = cyc.max(r.cycle_residual);
    }
    report(
        3,
        "star reflection and phase cycle",
        op < 1e-9 && cyc < 1e-12,
        format!("operator residual {op:.3e}, cycle residual {cyc:.3e}"),
    );
}

#[test]
fn c04_intra_block_routing() {
    let b = build_star_block(5, 3).unwrap();
    let sector = Sector::single(b.graph()).unwrap();
    let want = 6.0 * PI / 2f64.sqrt();
    let mut worst: f64 = 1.0;
    let mut timing: f64 = 0.0;
    for j in 1..=3 {
        for l in 1..=3 {
            let src = b.port(Side::Head, j);
            let s = compile_phase_program(&b, &src, &port_coefficients(3, l)).unwrap();
            let out = run_schedule(&sector.excited(&[src]).unwrap(), &s, &sector).unwrap();
            let f = fidelity_up_to_phase(&out, &sector.excited(&[b.port(Side::Head, l)]).unwrap()).unwrap();
            worst = worst.min(f);
            timing = timing.max((s.duration() - want).abs());
        }
    }
    report(
        4,
        "intra-block routing in 2d t0",
        1.0 - worst <= 1e-9 && timing < 1e-12,
        format!("min fidelity {worst:.15}, max |T - 6pi/sqrt2| {timing:.3e}"),
    );
}

#[test]
fn c05_uniform_modulus() {
    let b = build_star_block(5, 3).unwrap();
    let torus = tile_network(&LatticeSpec::periodic(LatticeKind::Triangular, vec![3, 4]).unwrap(), &b).unwrap();
    let all_one = torus.graph().edges().iter().all(|e| e.coupling.abs() == 1.0);
    let open = tile_network(&LatticeSpec::new(LatticeKind::Triangular, vec![3, 3]).unwrap(), &b).unwrap();
    let off: Vec<_> = open
        .graph()
        .edge_triples()
        .filter(|(.., j)| j.abs() != 1.0)
        .collect();
    let boundary_only = off.iter().all(|(u, v, _)| {
        [u, v]
            .iter()
            .any(|s| matches!(s, SiteId::Block { site: BlockSite::Arm { depth: 1, .. }, .. }))
    });
    report(
        5,
        "uniform coupling modulus (M=5, d=3)",
        all_one,
        format!(
            "torus: every |J| = 1 over {} edges; open patch: {} boundary-arm edges keep |J| = sqrt2 (boundary only: {boundary_only})",
            torus.graph().edges().len(),
            off.len()
        ),
    );
}

#[test]
fn c06_entangler() {
    let mut worst: f64 = 1.0;
    for d in [2, 4] {
        let b = build_star_block(5, d).unwrap();
        let (s, target) = compile_entangler(&b).unwrap();
        let sector = Sector::single(b.graph()).unwrap();
        let out = run_schedule(&sector.excited(&[b.port(Side::Head, 1)]).unwrap(), &s, &sector).unwrap();
        // (|1d⟩ + i|1,d/2⟩)/√2 built from sites, independent of the W basis
        let mut want = nalgebra::DVector::zeros(b.graph().len());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        want[b.graph().index_of(&b.port(Side::Head, d)).unwrap()] = Complex64::new(h, 0.0);
        want[b.graph().index_of(&b.port(Side::Head, d / 2)).unwrap()] = Complex64::new(0.0, h);
        assert!((target - &want).norm() < 1e-12);
        worst = worst.min(fidelity_up_to_phase(&out, &sector.state(want).unwrap()).unwrap());
    }
    report(6, "entangler for even d", 1.0 - worst <= 1e-9, format!("min fidelity {worst:.15}"));
}

#[test]
fn c07_commutator() {
    let b = build_star_block(5, 2).unwrap();
    let mut off: f64 = 0.0;
    let mut form: f64 = 0.0;
    let mut coeffs = Vec::new();
    for j in 1..=2 {
        for l in 1..=2 {
            let r = commutator_report(&b, j, l).unwrap();
            off = off.max(r.off_support_residual);
            form = form.max(r.form_residual);
            coeffs.push(r.coefficient);
        }
    }
    report(
        7,
        "nested commutator form",
        off < 1e-12 && form < 1e-12,
        format!(
            "off-support {off:.3e}, form {form:.3e}; measured coefficient {:.12} vs 4/d^2 = {}",
            coeffs[0],
            4.0 / 4.0
        ),
    );
}

#[test]
fn c08_multi_packet() {
    let start = Instant::now();
    let r = PrototypeRouter::new(&build_prototype_1d(6).unwrap()).unwrap();
    let ms = schedule_multi_1d(&r, &[Packet::new(0, 4, 10), Packet::new(1, 10, 16)]).unwrap();
    let sector = Sector::new(r.prototype().graph(), 2).unwrap();
    let psi = sector.excited(&[SiteId::Index(4), SiteId::Index(10)]).unwrap();
    let out = run_schedule(&psi, &ms.joint, &sector).unwrap();
    let f = fidelity_up_to_phase(&out, &sector.excited(&[SiteId::Index(10), SiteId::Index(16)]).unwrap()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    report(
        8,
        "two packets, one subsystem apart",
        1.0 - f <= 1e-9 && sector.dim() == 171 && secs < 2.0,
        format!("joint fidelity {f:.15}, dim {}, {secs:.2}s", sector.dim()),
    );
}

#[test]
fn c09_fault_routing() {
    let spec = LatticeSpec::new(LatticeKind::Square, vec![3, 3]).unwrap();
    let net = tile_network(&spec, &build_star_block(5, 2).unwrap()).unwrap();
    let faults = FaultMap::new(&spec, [Coord::new([1, 1])]).unwrap();
    let ports = net.boundary_ports();
    let src = ports.iter().find(|p| p.0 == Coord::new([0, 0])).unwrap().3.clone();
    let dst = ports.iter().find(|p| p.0 == Coord::new([2, 2])).unwrap().3.clone();
    let router = NetworkRouter::new(net.clone()).unwrap();
    let r = router.compile_route(&src, &dst, &faults).unwrap();
    let detour = r.plan.path.len() == 5 && !r.plan.path.contains(&Coord::new([1, 1]));

    // the same schedule on a copy whose faulty block has broken couplings
    let centre = Coord::new([1, 1]);
    let broken = CouplingGraph::new(
        net.graph().sites().to_vec(),
        net.graph().edge_triples().map(|(u, v, j)| {
            let inside = u.block() == Some(&centre) && v.block() == Some(&centre);
            (u.clone(), v.clone(), if inside { j * 1.37 } else { j })
        }),
    )
    .unwrap();
    let sector = Sector::single(&broken).unwrap();
    let out = run_schedule(&sector.excited(&[src.clone()]).unwrap(), &r.schedule, &sector).unwrap();
    let fb = fidelity_up_to_phase(&out, &sector.excited(&[dst.clone()]).unwrap()).unwrap();
    report(
        9,
        "routing around a faulty block",
        1.0 - r.fidelity <= 1e-9 && 1.0 - fb <= 1e-9 && detour,
        format!(
            "path {:?}, fidelity {:.15}, with broken centre couplings {fb:.15}",
            r.plan.path.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            r.fidelity
        ),
    );
}

#[test]
fn c10_percolation() {
    let start = Instant::now();
    let run = |p| percolation_estimate(LatticeKind::Triangular, 64, p, 1000, 42).unwrap();
    let (lo, mid, hi) = (run(0.3), run(0.5), run(0.7));
    let secs = start.elapsed().as_secs_f64();
    let sep = |a: &spinroute::verify::PercolationResult, b: &spinroute::verify::PercolationResult| {
        b.spanning - a.spanning >= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
    };
    report(
        10,
        "triangular site percolation",
        (0.3..=0.7).contains(&mid.spanning) && sep(&lo, &mid) && sep(&mid, &hi) && secs < 10.0,
        format!(
            "p=0.3: {:.3}, p=0.5: {:.3} +- {:.4}, p=0.7: {:.3}; {secs:.2}s",
            lo.spanning, mid.spanning, mid.stderr, hi.spanning
        ),
    );
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> CouplingGraph {
    let mut edges = std::collections::BTreeMap::new();
    for i in 2..=n {
        edges.insert((rng.random_range(1..i), i), rng.random_range(0.2..2.0));
    }
    for _ in 0..n {
        let (a, b) = (rng.random_range(1..=n), rng.random_range(1..=n));
        if a != b {
            edges.entry((a.min(b), a.max(b))).or_insert(rng.random_range(-2.0..-0.1));
        }
    }
    CouplingGraph::new(
        (1..=n).map(SiteId::Index).collect(),
        edges.into_iter().map(|((a, b), j)| (SiteId::Index(a), SiteId::Index(b), j)),
    )
    .unwrap()
}

/// `exp(−iHt)` by Taylor series with scaling and squaring.
fn expm(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let a = h.map(|x| Complex64::new(0.0, -x * t));
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = (norm.max(1.0).log2().ceil() as i32 + 1).max(0);
    let a = a.unscale(2f64.powi(s));
    let n = h.nrows();
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = sum.clone();
    for k in 1..40 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Full `2^n` XX Hamiltonian projected onto weight-k configurations.
fn projected(g: &CouplingGraph, configs: &[Vec<usize>]) -> DMatrix<f64> {
    let n = g.len();
    let dim = 1usize << n;
    let mut full = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        for e in g.edges() {
            if ((x >> e.a) ^ (x >> e.b)) & 1 == 1 {
                full[((x ^ (1 << e.a) ^ (1 << e.b)), x)] += e.coupling;
            }
        }
    }
    let masks: Vec<usize> = configs.iter().map(|c| c.iter().map(|i| 1 << i).sum()).collect();
    DMatrix::from_fn(masks.len(), masks.len(), |r, c| full[(masks[r], masks[c])])
}

#[test]
fn c11_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let g = random_graph(&mut rng, n);
        let t = rng.random_range(0.0..5.0);
        let h = sector_hamiltonian(&g, 1).unwrap();
        let u = SpectralCache::new(&h).unwrap().propagator(t);
        let v = expm(&g.hopping_matrix(), t);
        worst = worst.max((u - v).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let mut exact = true;
    for _ in 0..20 {
        let n = rng.random_range(2..=8);
        let g = random_graph(&mut rng, n);
        for k in 0..=2.min(n) {
            let h = sector_hamiltonian(&g, k).unwrap();
            let p = projected(&g, h.basis().configs());
            exact &= h.matrix().map(|z| z.re) == p && h.matrix().iter().all(|z| z.im == 0.0);
        }
    }
    report(
        11,
        "oracle equivalence",
        worst < 1e-9 && exact,
        format!("max |spectral - taylor| {worst:.3e}; sector projections exact: {exact}"),
    );
}
