// scratch probes for acceptance sizing (removed before ship)
use conrad::recon::{relative_l2_error, solve_p, SolveOptions};
use conrad::transforms::{compute_hemifield, QuadratureSpec};
use conrad::{rasterize, AnalyticPhantom, DiskGrid, GridSpec, HemiField, Vec3};

#[test]
fn probe_crime_convergence() {
    let phantom = AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.5, 1.0);
    // tighter grid around the support
    let grid = GridSpec::new(
        Vec3::new(-0.75, 1.25, -0.75),
        Vec3::new(1.5 / 12.0, 1.5 / 12.0, 1.5 / 12.0),
        [12, 12, 12],
    )
    .unwrap();
    let reference = rasterize(&phantom, grid).unwrap();
    let quad_solve = QuadratureSpec::default().for_grid(&grid);
    let disk = DiskGrid::new(41).unwrap();
    let u_nodes: Vec<f64> = (0..16).map(|i| -1.5 + 3.0 * i as f64 / 15.0).collect();
    let hemis_crime: Vec<HemiField> = u_nodes
        .iter()
        .map(|&u| compute_hemifield(&reference, u, disk, &quad_solve).unwrap())
        .collect();
    for iters in [200, 800, 3000] {
        let opts = SolveOptions { max_iters: iters, tol: 1e-12, rank_check: false, ..Default::default() };
        let (field, report) = solve_p(&hemis_crime, grid, &quad_solve, &opts).unwrap();
        let err = relative_l2_error(&field, &reference);
        let rr = report.residual_history.last().unwrap() / report.residual_history[0];
        println!("crime iters {iters:4}: err {err:.4e} rel_resid {rr:.3e} ratio {:?}", report.spectral_ratio);
    }
}

#[test]
fn probe_real_data_tight_grid() {
    let phantom = AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.5, 1.0);
    let grid = GridSpec::new(
        Vec3::new(-0.75, 1.25, -0.75),
        Vec3::new(1.5 / 12.0, 1.5 / 12.0, 1.5 / 12.0),
        [12, 12, 12],
    )
    .unwrap();
    let reference = rasterize(&phantom, grid).unwrap();
    let quad_solve = QuadratureSpec::default().for_grid(&grid);
    let disk = DiskGrid::new(41).unwrap();
    let u_nodes: Vec<f64> = (0..16).map(|i| -1.5 + 3.0 * i as f64 / 15.0).collect();
    // analytic data at matched ray step
    let hemis: Vec<HemiField> = u_nodes
        .iter()
        .map(|&u| compute_hemifield(&phantom, u, disk, &quad_solve).unwrap())
        .collect();
    for iters in [10, 20, 40, 80, 160, 400] {
        let opts = SolveOptions { max_iters: iters, tol: 1e-10, rank_check: false, ..Default::default() };
        let (field, report) = solve_p(&hemis, grid, &quad_solve, &opts).unwrap();
        let err = relative_l2_error(&field, &reference);
        let rr = report.residual_history.last().unwrap() / report.residual_history[0];
        println!("ball tight iters {iters:3}: err {err:.4} rel_resid {rr:.3e}");
    }
}

#[test]
fn probe_gaussian_tight() {
    let phantom = AnalyticPhantom::gaussian(Vec3::new(0.0, 2.0, 0.0), 0.18, 1.0);
    let grid = GridSpec::new(
        Vec3::new(-0.75, 1.25, -0.75),
        Vec3::new(1.5 / 12.0, 1.5 / 12.0, 1.5 / 12.0),
        [12, 12, 12],
    )
    .unwrap();
    let reference = rasterize(&phantom, grid).unwrap();
    let quad_solve = QuadratureSpec::default().for_grid(&grid);
    let disk = DiskGrid::new(41).unwrap();
    let u_nodes: Vec<f64> = (0..16).map(|i| -1.5 + 3.0 * i as f64 / 15.0).collect();
    let hemis: Vec<HemiField> = u_nodes
        .iter()
        .map(|&u| compute_hemifield(&phantom, u, disk, &quad_solve).unwrap())
        .collect();
    for iters in [40, 160, 400, 1000] {
        let opts = SolveOptions { max_iters: iters, tol: 1e-10, rank_check: false, ..Default::default() };
        let (field, report) = solve_p(&hemis, grid, &quad_solve, &opts).unwrap();
        let err = relative_l2_error(&field, &reference);
        let rr = report.residual_history.last().unwrap() / report.residual_history[0];
        println!("gauss tight iters {iters:4}: err {err:.4} rel_resid {rr:.3e}");
    }
}
