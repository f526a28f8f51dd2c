use approx::assert_relative_eq;
use fractal_she::fractal::PcfStructure;
use fractal_she::network::{build_network, green_function, ResistanceSolver};
use fractal_she::she::{field_variance, simulate_ensemble, Noise};
use fractal_she::spectral::{resolvent_density, solve_spectrum};
use fractal_she::stats::VarianceEstimate;
use fractal_she::BoundaryCondition;
use nalgebra::DMatrix;

fn interval_position(net: &fractal_she::network::ApproximationNetwork, v: usize) -> f64 {
    net.complex().coords_f64(v).unwrap()[0]
}

#[test]
fn interval_green_function_is_the_dirichlet_kernel() {
    let s = PcfStructure::interval(3).unwrap();
    let net = build_network(&s, 3, BoundaryCondition::Dirichlet).unwrap();
    let ends = net.boundary_ids().to_vec();
    for x in 0..net.vertex_count() {
        for y in 0..net.vertex_count() {
            let (a, b) = (interval_position(&net, x), interval_position(&net, y));
            let exact = a.min(b) * (1.0 - a.max(b));
            assert_relative_eq!(green_function(&net, &ends, x, y).unwrap(), exact, epsilon = 1e-12);
        }
    }
}

#[test]
fn full_basis_resolvent_inverts_the_shifted_operator() {
    let s = PcfStructure::gasket(2).unwrap();
    let bc = BoundaryCondition::Neumann;
    let net = build_network(&s, 3, bc).unwrap();
    let b = solve_spectrum(&net, bc, net.vertex_count()).unwrap();
    let lambda = 0.7;
    let c = net.stiffness();
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(net.mass()));
    let inv = (c + m * lambda).try_inverse().unwrap();
    for x in 0..net.vertex_count() {
        for y in 0..net.vertex_count() {
            assert_relative_eq!(resolvent_density(&b, lambda, x, y).unwrap(), inv[(x, y)], epsilon = 1e-10);
        }
    }
}

#[test]
fn resistance_is_a_metric_on_the_gasket() {
    let s = PcfStructure::gasket(2).unwrap();
    let net = build_network(&s, 3, BoundaryCondition::Neumann).unwrap();
    let r = ResistanceSolver::new(&net).unwrap().all_pairs();
    let n = net.vertex_count();
    for x in 0..n {
        assert_eq!(r[(x, x)], 0.0);
        for y in 0..n {
            assert_relative_eq!(r[(x, y)], r[(y, x)], epsilon = 1e-13);
            if x != y {
                assert!(r[(x, y)] > 0.0);
            }
            for z in 0..n {
                assert!(r[(x, z)] <= r[(x, y)] + r[(y, z)] + 1e-12);
            }
        }
    }
}

#[test]
fn simulated_variance_matches_the_spectral_sum() {
    let s = PcfStructure::gasket(2).unwrap();
    let bc = BoundaryCondition::Dirichlet;
    let net = build_network(&s, 3, bc).unwrap();
    let b = solve_spectrum(&net, bc, net.free_vertices(bc).len()).unwrap();
    let verts: Vec<usize> = b.free_vertices().iter().copied().step_by(3).collect();
    let times = [0.02, 0.3];
    let e = simulate_ensemble(&b, 0.4, &[], &times, 3, 4000, &verts, Noise::White).unwrap();
    for (i, &t) in times.iter().enumerate() {
        for (j, &v) in verts.iter().enumerate() {
            let xs: Vec<f64> = e.samples.iter().map(|r| r[i][j]).collect();
            let est = VarianceEstimate::from_samples(&xs);
            assert!(est.within(field_variance(&b, 0.4, t, v), 4.5), "t = {t}, vertex {v}");
        }
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let s = PcfStructure::interval(2).unwrap();
    let bc = BoundaryCondition::Neumann;
    let net = build_network(&s, 5, bc).unwrap();
    let b = solve_spectrum(&net, bc, 12).unwrap();
    let verts: Vec<usize> = (0..net.vertex_count()).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_ensemble(&b, 0.0, &[], &[0.1, 1.0], 11, 64, &verts, Noise::White).unwrap())
    };
    assert_eq!(run(1).samples, run(3).samples);
}
