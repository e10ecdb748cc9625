// Timing probe for the full chain on the surrogate engine (removed
// before final delivery; mirrors what the acceptance suite will do).
use koopjet::pipeline::*;
use koopjet::plant::Plant;
use std::time::Instant;

#[test]
#[ignore]
fn timing() {
    let cfg = PipelineConfig::default();
    let t0 = Instant::now();
    let plant = Plant::new(cfg.plant.clone()).unwrap();
    println!("plant build: {:?}", t0.elapsed());

    let t = Instant::now();
    let train = simulate_training(&plant, &cfg).unwrap();
    println!("train sim ({} rows): {:?}", train.dataset.len(), t.elapsed());

    let t = Instant::now();
    let test = simulate_test(&plant, &cfg).unwrap();
    println!("test sim ({} rows): {:?}", test.dataset.len(), t.elapsed());

    let t = Instant::now();
    let (sindy, report) = identify(&train.dataset, &cfg).unwrap();
    println!("sindy fit: {:?}  val MAE {:.2} RPM MAPE {:.3}%", t.elapsed(), report.mae_rpm, report.mape);
    println!("model: {sindy}");

    let t = Instant::now();
    let test_report = koopjet::sindy::validate_predict(&sindy, &test.dataset).unwrap();
    println!("sindy test MAE {:.2} RPM MAPE {:.3}% ({:?})", test_report.mae_rpm, test_report.mape, t.elapsed());

    let t = Instant::now();
    let (kem, eig) = build_kem(&sindy, &cfg).unwrap();
    println!("kem build: {:?}  eig obj {:.3e} mae {:.3e} dim {}", t.elapsed(), eig.objective, eig.mae, kem.dim());
    for e in &eig.entries {
        println!("  eig: {:.3} +/- {:.3}i [{:?}]", e.alpha, e.beta, e.tag);
    }

    // KEM validation on test data
    let t = Instant::now();
    let kem_traj = kem.simulate_forced(test.dataset.n_norm[0], &test.dataset.wf_norm[..test.dataset.len()-1], cfg.dt, false).unwrap();
    let norm = &test.dataset.lineage.normalization;
    let mut abs = 0.0; let mut pct = 0.0;
    for k in 0..test.dataset.len() {
        let err = norm.s_n * (kem_traj[k] - test.dataset.n_norm[k]);
        abs += err.abs();
        pct += (err / (test.dataset.n_norm[k] * norm.s_n + norm.o_n)).abs();
    }
    let n = test.dataset.len() as f64;
    println!("kem test MAE {:.2} RPM MAPE {:.3}% ({:?})", abs/n, 100.0*pct/n, t.elapsed());

    let t = Instant::now();
    let design = design_controllers(&plant, &sindy, &kem, &test.dataset, &cfg).unwrap();
    println!("controller design: {:?}", t.elapsed());
    println!("margins: GM {:.2} dB PM {:.1} deg, wIAE {:.4}", design.weights.margins.gm_min_db, design.weights.margins.pm_min_deg, design.weights.wiae);

    let t = Instant::now();
    for sc in standard_scenarios(cfg.dt) {
        let ev = evaluate_scenario(&plant, &design.set, &sc).unwrap();
        print!("{}: ", sc.name);
        for (k, m) in &ev.metrics {
            print!("{k} wIAE={:.0} IAE={:.0} MST={:?} ", m.wiae_rpm_s, m.iae_rpm_s, m.mst_s.map(|v| (v*100.0).round()/100.0));
        }
        println!();
        if sc.name == "disturbance" {
            for (k, tr) in &ev.traces {
                let peak = tr.n_rel.iter().map(|v| (v - 0.9).abs()).fold(0.0, f64::max);
                print!("{k} peak={:.5} ", peak);
            }
            println!();
        }
    }
    println!("evaluation: {:?}", t.elapsed());
    // IMC filter-constant scan
    let mut set2 = design.set.clone();
    set2.imc_deriv_window = 11;
    set2.imc_deriv_order = 2;
    for tau in [0.05, 0.08, 0.10, 0.13, 0.16] {
        set2.imc_tau_f = tau;
        let (w, o) = (11, 2);
        let sc = &standard_scenarios(cfg.dt)[0];
        let tr = koopjet::bench::run_tracking(&plant, &set2, "imc", sc).unwrap();
        let m = koopjet::bench::compute_metrics(&tr, sc, plant.design.n_dp).unwrap();
        let scv = &standard_scenarios(cfg.dt)[1];
        let trv = koopjet::bench::run_tracking(&plant, &set2, "imc", scv).unwrap();
        let mv = koopjet::bench::compute_metrics(&trv, scv, plant.design.n_dp).unwrap();
        let scd = &standard_scenarios(cfg.dt)[2];
        let trd = koopjet::bench::run_tracking(&plant, &set2, "imc", scd).unwrap();
        let peak = trd.n_rel.iter().map(|v| (v - 0.9).abs()).fold(0.0, f64::max);
        let md = koopjet::bench::compute_metrics(&trd, scd, plant.design.n_dp).unwrap();
        println!("imc tau={tau} w={w} o={o}: sea {:.0} varying {:.0} dist {:.0} peak {:.5}", m.wiae_rpm_s, mv.wiae_rpm_s, md.iae_rpm_s, peak);
    }
}
