use cvqe_core::cvqe::{collect_spin_factorized, evaluate, minimize_theta, scan_theta, Layout, Sector, Shots};
use cvqe_core::experiment::{optimize_gutzwiller, Mode, Model};
use cvqe_core::hubbard::{HubbardParams, Lattice};
use cvqe_core::sim;
use cvqe_core::MeasurementRecordSet;

fn model(lat: Lattice, d: f64) -> Model {
    let p = HubbardParams::with_default_mu(&lat, d, 1.0).unwrap();
    Model::new(lat, p, None).unwrap()
}

#[test]
fn fixed_seed_gives_identical_files() {
    let m = model(Lattice::square4(), 2.0);
    let a = m.records(Mode::Full, 2000, 17).unwrap().to_json().unwrap();
    let b = m.records(Mode::Full, 2000, 17).unwrap().to_json().unwrap();
    let c = m.records(Mode::Full, 2000, 18).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn file_round_trip_replays_bitwise() {
    let m = model(Lattice::triangular4(), 1.5);
    let dir = tempfile::tempdir().unwrap();
    for mode in [Mode::Full, Mode::SpinFactorized, Mode::InfiniteShot] {
        let rec = m.records(mode, 5000, 3).unwrap();
        let path = dir.path().join(format!("{mode}.json"));
        rec.write(&path).unwrap();
        let back = MeasurementRecordSet::read(&path).unwrap();
        for theta in [0.0, 0.37, 2.0, f64::INFINITY] {
            let a = evaluate(&rec, &m.dressed, &m.gutzwiller(theta));
            let b = evaluate(&back, &m.dressed, &m.gutzwiller(theta));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
                    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
                }
                // This sea has no support free of double occupancy.
                (Err(_), Err(_)) => assert!(theta.is_infinite()),
                (a, b) => panic!("{a:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn zero_theta_is_plain_expectation() {
    let m = model(Lattice::square4(), 2.0);
    let rec = m.records(Mode::InfiniteShot, 0, 0).unwrap();
    let e = evaluate(&rec, &m.dressed, &m.gutzwiller(0.0)).unwrap();
    let dense = m.dense().unwrap();
    let psi = sim::apply(&sim::vacuum(8), &m.sea.circuit().unwrap()).unwrap();
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let plain = v.dotc(&(dense.matrix() * &v)).re;
    assert!((e.energy - plain).abs() < 1e-12);
    assert!((e.denominator - 1.0).abs() < 1e-12);
    assert_eq!(e.stderr, 0.0);
}

#[test]
fn infinite_theta_projects_out_double_occupancy() {
    let m = model(Lattice::square4(), 4.0);
    let rec = m.records(Mode::InfiniteShot, 0, 0).unwrap();
    let theta = m.gutzwiller(f64::INFINITY);
    let replay = evaluate(&rec, &m.dressed, &theta).unwrap();
    let psi = sim::apply(&sim::vacuum(8), &m.sea.circuit().unwrap()).unwrap();
    let oracle = m.dense().unwrap().dressed_expectation(&psi, &theta).unwrap();
    assert!((replay.energy - oracle.energy).abs() < 1e-10);
    assert!(replay.denominator > 0.0 && replay.denominator < 1.0);
}

#[test]
fn annihilated_state_reports_vanishing_norm() {
    let m = model(Lattice::triangular4(), 1.5);
    let rec = m.records(Mode::InfiniteShot, 0, 0).unwrap();
    assert!(evaluate(&rec, &m.dressed, &m.gutzwiller(f64::INFINITY)).is_err());
    assert!(evaluate(&rec, &m.dressed, &m.gutzwiller(25.0)).is_ok());
}

#[test]
fn square_interior_minimum_matches_dense_minimizer() {
    let m = model(Lattice::square4(), 2.0);
    let rec = m.records(Mode::InfiniteShot, 0, 0).unwrap();
    let tol = 1e-7;
    let replay = minimize_theta(&rec, &m.dressed, |t| m.gutzwiller(t), (0.0, 3.0), tol).unwrap();
    let psi = sim::apply(&sim::vacuum(8), &m.sea.circuit().unwrap()).unwrap();
    let dense = m.dense().unwrap().minimize(&psi, |t| m.gutzwiller(t), (0.0, 3.0), tol).unwrap();
    assert!(replay.theta > 0.05 && !replay.at_upper_edge, "θ* = {}", replay.theta);
    assert!((replay.theta - dense.x).abs() <= 1e-6, "{} vs {}", replay.theta, dense.x);
    let grid: Vec<_> = (0..=300).map(|i| m.gutzwiller(0.01 * i as f64)).collect();
    let scan = scan_theta(&rec, &m.dressed, &grid).unwrap();
    assert!((0.01 * scan.argmin as f64 - replay.theta).abs() <= 0.01);
}

#[test]
fn noninteracting_scan_minimum_at_zero() {
    for lat in [Lattice::square4(), Lattice::triangular4()] {
        let m = model(lat, 0.0);
        let rec = m.records(Mode::InfiniteShot, 0, 0).unwrap();
        let grid: Vec<_> = (0..=300).map(|i| m.gutzwiller(0.01 * i as f64)).collect();
        assert_eq!(scan_theta(&rec, &m.dressed, &grid).unwrap().argmin, 0);
    }
}

#[test]
fn spin_factorized_records_layout() {
    let m = model(Lattice::square4(), 2.0);
    let rec = m.records(Mode::SpinFactorized, 1000, 5).unwrap();
    assert_eq!(rec.header().qubits, 4);
    assert_eq!(rec.header().layout, Layout::SpinFactorized);
    assert!(rec.groups().iter().any(|g| g.sector == Sector::Up));
    assert!(rec.groups().iter().any(|g| g.sector == Sector::Down && g.outcomes.shots().is_none()));
    let json = rec.to_json().unwrap();
    assert!(json.contains("\"spin-factorized\"") && json.contains("\"up-block-first\""));
}

#[test]
fn spin_factorized_exact_limit_at_zero_interaction() {
    for lat in [Lattice::square4(), Lattice::triangular4()] {
        let m = model(lat, 0.0);
        let spin = m.sea.spin_circuit().unwrap();
        let rec = collect_spin_factorized(&spin, &spin, &m.dressed, Shots::Exact, 0).unwrap();
        let opt = optimize_gutzwiller(&rec, &m, (0.0, 3.0), 1e-7).unwrap();
        let exact = m.dense().unwrap().ground_state().unwrap().energy;
        assert!((opt.estimate.energy - exact).abs() < 1e-9);
    }
}

#[test]
fn sampled_spin_factorized_close_to_exact() {
    let m = model(Lattice::square4(), 2.0);
    let theta = m.gutzwiller(0.5);
    let exact = evaluate(&m.records(Mode::InfiniteShot, 0, 0).unwrap(), &m.dressed, &theta).unwrap();
    let est = evaluate(&m.records(Mode::SpinFactorized, 200_000, 11).unwrap(), &m.dressed, &theta).unwrap();
    assert!(est.stderr > 0.0);
    assert!((est.energy - exact.energy).abs() < 5.0 * est.stderr);
}
