use biharmonic_certify::expr::Point;
use biharmonic_certify::problems::{load_problem_file, model_1d};

#[test]
fn sample_file_matches_the_built_in_model() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/model_1d.problem");
    let loaded = load_problem_file(&path).unwrap();
    let builtin = model_1d().unwrap();
    assert_eq!(loaded.domain, builtin.domain);
    assert_eq!(loaded.friedrichs, builtin.friedrichs);
    let (a, b) = (loaded.exact.as_ref().unwrap(), builtin.exact.as_ref().unwrap());
    assert_eq!(a.coincidence, b.coincidence);
    assert_eq!(a.free_boundary, b.free_boundary);
    for k in 0..=200 {
        let p = Point::Line(-1.0 + k as f64 / 100.0);
        assert_eq!(loaded.f.evaluate(p).unwrap(), builtin.f.evaluate(p).unwrap());
        assert_eq!(a.u.evaluate(p).unwrap(), b.u.evaluate(p).unwrap());
        assert_eq!(a.p_star.evaluate(p).unwrap(), b.p_star.evaluate(p).unwrap());
        for name in ["v1", "nstar", "ntilde"] {
            let (x, y) = (loaded.approx(name, None).unwrap(), builtin.approx(name, None).unwrap());
            match (x.primal(), y.primal()) {
                (Some(x), Some(y)) => assert!((x.evaluate(p).unwrap() - y.evaluate(p).unwrap()).abs() < 1e-12),
                _ => {
                    let (x, y) = (x.dual().unwrap().evaluate(p).unwrap(), y.dual().unwrap().evaluate(p).unwrap());
                    assert!((x[0] - y[0]).abs() < 1e-10, "{name} at {p:?}");
                }
            }
        }
    }
}
