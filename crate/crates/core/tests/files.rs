use umbilic::harness::{generate, run_experiment, ExperimentConfig, SurfaceSpec};
use umbilic::io::{experiment_report, read_surface, write_surface, Encoding, Report};

#[test]
fn surface_files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&SurfaceSpec::ellipsoid_family(2, 0.05).with_shape(vec![12, 24])).unwrap();
    for enc in [Encoding::Text, Encoding::Binary] {
        let path = dir.path().join(format!("s.{}", enc.name()));
        write_surface(&path, &s, enc).unwrap();
        let back = read_surface(&path).unwrap();
        assert_eq!(
            back.f()
                .values()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>(),
            s.f()
                .values()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        );
        assert_eq!(back.provenance(), s.provenance());
    }
}

#[test]
fn reports_are_reproducible_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.surf");
    let s = generate(&SurfaceSpec::ellipsoid_family(2, 0.02)).unwrap();
    write_surface(&path, &s, Encoding::Text).unwrap();
    let config = ExperimentConfig::default();
    let a = experiment_report(&run_experiment(&read_surface(&path).unwrap(), &config));
    let b = experiment_report(&run_experiment(&s, &config));
    assert_eq!(a.render(false), b.render(false));
    let rpath = dir.path().join("r.txt");
    a.write(&rpath).unwrap();
    let parsed = Report::parse(&std::fs::read_to_string(&rpath).unwrap()).unwrap();
    let ring: f64 = parsed
        .get("rigidity", "a_ring_norm")
        .unwrap()
        .parse()
        .unwrap();
    let direct = run_experiment(&s, &config).rigidity.unwrap().a_ring_norm;
    assert_eq!(ring.to_bits(), direct.to_bits());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_surface(std::path::Path::new("/nonexistent/surface")).unwrap_err();
    assert!(matches!(err, umbilic::Error::Io(_)));
}
