fn main() {
    let x = exgap::problems::planted_bp_signal(1, 24, 64, 4);
    let mx = x.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    println!("max |x_nat| = {mx}");
    let p = exgap::problems::make_basis_pursuit(1, 24, 64, 4, Some(3.0));
    let op = p.operator();
    let l = exgap::linop::spectral_norm_sq(&op, 1e-10, 100_000).unwrap();
    println!("||A||^2 est = {l}");
    let sm = exgap::smoothing::SmootherConfig::bregman(vec![0.0; 64], l);
    let mut cfg = exgap::schemes::SolverConfig::new(exgap::schemes::Scheme::OneP2D, sm, 2000);
    cfg.k_total = Some(2000);
    cfg.eps_f = 1e-6; cfg.eps_x = 1e-6;
    let out = exgap::schemes::solve(&p, &cfg).unwrap();
    println!("status {:?}", out.trace.status);
    for k in [0, 1, 10, 100, 500, 1000, 1500, 2000] {
        if let Some(r) = out.trace.records.get(k) {
            println!("k={} feas_rel={:.3e} f={:.6}", r.k, r.feas_rel, r.f_val);
        }
    }
}
