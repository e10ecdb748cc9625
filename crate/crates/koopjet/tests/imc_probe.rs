use koopjet::bench::{canonical_profile, run_tracking};
use koopjet::pipeline::*;
use koopjet::plant::Plant;

#[test]
#[ignore]
fn probe() {
    let cfg = PipelineConfig::default();
    let plant = Plant::new(cfg.plant.clone()).unwrap();
    let train = simulate_training(&plant, &cfg).unwrap();
    let test = simulate_test(&plant, &cfg).unwrap();
    let (sindy, _) = identify(&train.dataset, &cfg).unwrap();
    // print local linearizations over the range
    for i in 0..=10 {
        let n = i as f64 / 10.0;
        let lin = sindy.linearize(n).unwrap();
        println!("N={n:.1}: K_e={:.3} T_e={:.3}", lin.k_e, lin.t_e);
    }
    let (kem, _) = build_kem(&sindy, &cfg).unwrap();
    let design = design_controllers(&plant, &sindy, &kem, &test.dataset, &cfg).unwrap();
    let sc = canonical_profile(cfg.dt);
    for kind in ["imc", "klqgi"] {
        let trace = run_tracking(&plant, &design.set, kind, &sc).unwrap();
        println!("--- {kind} around the first stair (t=5..9):");
        for k in (480..900).step_by(25) {
            println!("t={:.2} Nd={:.3} N={:.4} v={:.4} clamp={}", trace.t[k], trace.nd_rel[k], trace.n_rel[k], trace.v[k], trace.clamp[k]);
        }
    }
}
