use lpac_web::*;
use serde_json::Value;

#[test]
fn curve_stays_above_cosine() {
    let v: Value = serde_json::from_str(&cosine_curve(7, 201).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 7);
    assert_eq!(v["x"].as_array().unwrap().len(), 201);
    let gap = v["max_gap"].as_f64().unwrap();
    // The grid includes both ends, where the outer tangents sit farthest
    // from the curve.
    let l = -std::f64::consts::FRAC_PI_3;
    let a = l + (2.0 * std::f64::consts::FRAC_PI_3) / 8.0;
    let edge = a.cos() + a.sin() * (a - l) - l.cos();
    assert!((gap - edge).abs() < 1e-12, "{gap} vs {edge}");
    for ((c, e), ch) in v["cos"]
        .as_array()
        .unwrap()
        .iter()
        .zip(v["envelope"].as_array().unwrap())
        .zip(v["chord"].as_array().unwrap())
    {
        let (c, e, ch) = (
            c.as_f64().unwrap(),
            e.as_f64().unwrap(),
            ch.as_f64().unwrap(),
        );
        assert!(ch <= c + 1e-12 && c <= e + 1e-12);
    }
}

#[test]
fn zero_segments_is_an_error() {
    assert!(cosine_curve(0, 10).is_err());
}

#[test]
fn embedded_ieee14_compares() {
    let v: Value = serde_json::from_str(&compare_case(&ieee14(), 20).unwrap()).unwrap();
    assert_eq!(v["models"].as_array().unwrap().len(), 3);
    assert_eq!(v["buses"].as_array().unwrap().len(), 14);
    let ldc = v["accuracy"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["model"] == "ldc" && a["quantity"] == "active_mw")
        .unwrap();
    assert!((ldc["mean_abs"].as_f64().unwrap() - 1.392).abs() < 5e-4);
}

#[test]
fn garbage_case_is_rejected() {
    assert!(compare_case("not a case", 20).is_err());
}

#[test]
fn intact_network_sheds_nothing_under_ldc() {
    let v: Value = serde_json::from_str(&restore_case(&ieee14(), vec![]).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0]["shed_percent"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn outages_shed_load_and_bad_lines_fail() {
    let v: Value = serde_json::from_str(&restore_case(&ieee14(), vec![2, 3]).unwrap()).unwrap();
    for r in v.as_array().unwrap() {
        assert!(r["error"].is_null(), "{r}");
    }
    assert!(restore_case(&ieee14(), vec![99]).is_err());
}
