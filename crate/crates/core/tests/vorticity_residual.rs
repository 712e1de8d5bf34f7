use axiswirl::fields::VorticityFields;
use axiswirl::grid::CylGrid;
use axiswirl::mms::{forcing_for, make_solution, MmsSpec};
use axiswirl::operators::{curl_axisym, vorticity_transport_residual};

/// Interior maximum of the ω_φ residual and of the swirl coupling term
/// `2 u_φ ω_ρ / ρ` on a Taylor vortex with strong swirl.
fn residual(n: usize) -> (f64, f64) {
    let spec = MmsSpec::TaylorVortexSwirl { amplitude: 0.5, swirl: 1.0, mode: 1, decay: 1.0 };
    let nu = 0.5;
    let g = CylGrid::new(n, n, 1.0, 0.0, 1.0).unwrap();
    let sol = make_solution(spec, 1.0, 0.0, 1.0, nu).unwrap();
    let (t, dt) = (0.1, 1e-5);
    let v = sol.sample(g, t);
    let w = curl_axisym(&v);
    let dw = VorticityFields::time_derivative(&curl_axisym(&sol.sample(g, t - dt)), &curl_axisym(&sol.sample(g, t + dt)), 2.0 * dt);
    let r = vorticity_transport_residual(&v, &w, &forcing_for(&sol, g, t, nu), nu, Some(&dw)).unwrap();
    let (mut res, mut coupling) = (0.0_f64, 0.0_f64);
    for k in 0..g.n_z {
        for j in n / 4..3 * n / 4 {
            res = res.max(r[1].at(j, k).abs());
            coupling = coupling.max((2.0 * v.u_phi.at(j, k) * w.w_rho.at(j, k) / g.rho(j)).abs());
        }
    }
    (res, coupling)
}

#[test]
fn swirl_coupling_sign_in_the_azimuthal_vorticity_equation() {
    let levels: Vec<(f64, f64)> = [16, 32, 64].iter().map(|&n| residual(n)).collect();
    for w in levels.windows(2) {
        assert!(w[1].0 < 0.4 * w[0].0, "{levels:?}");
    }
    // the opposite sign would leave a residual near 2·coupling at every level
    let (res, coupling) = levels[2];
    assert!(res < 0.1 * 2.0 * coupling, "{levels:?}");
}
