use keybind_wasm_demo::{fer_sweep_json, mask_view_json, security_json};

#[test]
fn security_matches_core_report() {
    let v: serde_json::Value = serde_json::from_str(&security_json(1000.0, 0.1761, 3).unwrap()).unwrap();
    let r = keybind::metrics::SecurityReport::new(1000.0, 176, 3).unwrap();
    assert_eq!(v["t"], 176);
    assert_eq!(v["s_gv"].as_f64().unwrap(), r.s_gv);
    assert_eq!(v["h_sys"].as_f64().unwrap(), 300.0);
}

#[test]
fn sweeps_are_reproducible() {
    let a = fer_sweep_json("ms", 30, &[0.15, 0.17], 40, 3).unwrap();
    assert_eq!(a, fer_sweep_json("ms", 30, &[0.15, 0.17], 40, 3).unwrap());
    assert!(fer_sweep_json("bogus", 30, &[0.15], 1, 3).is_err());
}

#[test]
fn mask_search_hits_quantile() {
    let v: serde_json::Value = serde_json::from_str(&mask_view_json(80, 0.5, 4, 0.235, 0.95, 5).unwrap()).unwrap();
    let achieved = v["achieved"].as_f64().unwrap();
    assert!((0.94..=0.97).contains(&achieved), "{achieved}");
    assert!(v["kappa"].as_f64().unwrap() > 0.0);
}
