use std::fs;
use std::path::Path;

use tropitest::io::{self, EmbeddingDump, Manifest, ManifestEntry};
use tropitest::pipeline::{emit_report, load_collection, run_pipeline, InputKind, Objects, PipelineConfig};
use tropitest::synthgeo::sample_shape;
use tropitest::tropical::coordinate_count;
use tropitest::{Barcode, Error, ShapeSpec};

fn write_clouds(dir: &Path, spec: &ShapeSpec, count: usize, seed: u64) {
    fs::create_dir_all(dir).unwrap();
    let mut manifest = Manifest::default();
    for i in 0..count {
        let pc = sample_shape(spec, 30, 0.05, seed + i as u64).unwrap();
        let name = format!("c{i}.csv");
        io::write_point_cloud_csv(&dir.join(&name), &pc).unwrap();
        manifest.clouds.push(ManifestEntry {
            path: name,
            label: format!("cloud {i}"),
        });
    }
    manifest.write(&dir.join("manifest.json")).unwrap();
}

fn write_barcodes(dir: &Path, barcodes: &[Barcode]) {
    fs::create_dir_all(dir).unwrap();
    for (i, b) in barcodes.iter().enumerate() {
        io::write_barcode_json(&dir.join(format!("{i:02}.json")), b).unwrap();
    }
}

#[test]
fn manifest_order_is_kept() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ShapeSpec::circle(1.0).unwrap();
    fs::write(dir.path().join("z.csv"), "0,0\n1,0\n").unwrap();
    fs::write(dir.path().join("a.csv"), "0,0\n0,1\n0,2\n").unwrap();
    let pc = sample_shape(&spec, 5, 0.0, 1).unwrap();
    io::write_point_cloud_csv(&dir.path().join("m.csv"), &pc).unwrap();
    Manifest {
        clouds: ["z.csv", "a.csv", "m.csv"]
            .iter()
            .map(|p| ManifestEntry { path: p.to_string(), label: p.to_string() })
            .collect(),
    }
    .write(&dir.path().join("list.json"))
    .unwrap();

    let c = load_collection(&dir.path().join("list.json"), InputKind::Pointclouds).unwrap();
    assert_eq!(c.labels, ["z.csv", "a.csv", "m.csv"]);
    let Objects::PointClouds(pcs) = c.objects else { panic!() };
    assert_eq!(pcs.iter().map(|p| p.len()).collect::<Vec<_>>(), [2, 3, 5]);
    assert_eq!(pcs[2].points(), pc.points());

    // without a manifest the directory is read in name order
    let c = load_collection(dir.path(), InputKind::Pointclouds).unwrap();
    assert_eq!(c.labels, ["a", "m", "z"]);
}

#[test]
fn malformed_entries_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "0,0\n1,0\n").unwrap();
    fs::write(dir.path().join("b.csv"), "0,0\n\n1,0\n2,nan?\n").unwrap();
    match load_collection(dir.path(), InputKind::Pointclouds) {
        Err(Error::Parse { path, line, .. }) => {
            assert!(path.ends_with("b.csv"));
            assert_eq!(line, 4);
        }
        other => panic!("{other:?}"),
    }
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_collection(empty.path(), InputKind::Pointclouds),
        Err(Error::Input(_))
    ));
    fs::write(empty.path().join("manifest.json"), r#"{"clouds": []}"#).unwrap();
    assert!(matches!(
        load_collection(empty.path(), InputKind::Pointclouds),
        Err(Error::Input(_))
    ));
}

#[test]
fn worked_example_barcodes_in_the_dump() {
    let dir = tempfile::tempdir().unwrap();
    let b1 = Barcode::from_pairs(1, &[(2.0, 1.0), (3.0, 1.0)]).unwrap();
    let b2 = Barcode::from_pairs(1, &[(4.0, 4.0)]).unwrap();
    write_barcodes(&dir.path().join("a"), &[b1.clone(), b2]);
    write_barcodes(&dir.path().join("b"), &[b1]);
    let mut cfg = PipelineConfig::new(dir.path().join("a"), dir.path().join("b"));
    cfg.kind = InputKind::Barcodes;
    cfg.embeddings_out = Some(dir.path().join("emb"));
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!((report.n, report.m, report.d), (2, 3, 5));
    let dump = EmbeddingDump::read(&dir.path().join("emb/a.json")).unwrap();
    assert_eq!(dump.vectors, vec![vec![1.0, 2.0, 4.0, 5.0, 7.0], vec![4.0, 4.0, 8.0, 8.0, 8.0]]);
    // three objects: all three splits are enumerated
    assert_eq!(report.result.num_permutations, 3);
}

#[test]
fn identical_collections_give_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_clouds(&dir.path().join("a"), &ShapeSpec::circle(1.0).unwrap(), 6, 10);
    let cfg = PipelineConfig::new(dir.path().join("a"), dir.path().join("a"));
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.result.statistic, 0.0);
    assert!(!report.result.reject);
    assert_eq!(report.result.p_value, 1.0);
}

#[test]
fn reports_are_reproducible_and_pool_n() {
    let dir = tempfile::tempdir().unwrap();
    write_clouds(&dir.path().join("a"), &ShapeSpec::circle(1.0).unwrap(), 8, 100);
    write_clouds(&dir.path().join("b"), &ShapeSpec::figure_eight(0.5).unwrap(), 8, 200);
    let mut cfg = PipelineConfig::new(dir.path().join("a"), dir.path().join("b"));
    cfg.permutations = 199;
    cfg.seed = 11;
    cfg.embeddings_out = Some(dir.path().join("emb"));

    let first = run_pipeline(&cfg).unwrap();
    let second = run_pipeline(&cfg).unwrap();
    emit_report(&first, &dir.path().join("r1.json")).unwrap();
    emit_report(&second, &dir.path().join("r2.json")).unwrap();
    let text = fs::read(dir.path().join("r1.json")).unwrap();
    assert_eq!(text, fs::read(dir.path().join("r2.json")).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains(&format!("\"config_hash\": \"{}\"", cfg.hash())));

    let n = first.n;
    let most = first.collections.a.max_positive_bars.max(first.collections.b.max_positive_bars);
    assert_eq!(n, most.max(1));
    assert_eq!(first.d, coordinate_count(n));
    for side in ["a", "b"] {
        let dump = EmbeddingDump::read(&dir.path().join(format!("emb/{side}.json"))).unwrap();
        assert!(dump.vectors.iter().all(|v| v.len() == first.d));
    }
}

#[test]
fn errors_carry_stage_labels() {
    let dir = tempfile::tempdir().unwrap();
    write_barcodes(&dir.path().join("a"), &[Barcode::from_pairs(1, &[(500.0, 1.0)]).unwrap()]);
    write_barcodes(&dir.path().join("b"), &[Barcode::from_pairs(1, &[(1.0, 1.0)]).unwrap()]);
    let mut cfg = PipelineConfig::new(dir.path().join("a"), dir.path().join("b"));
    cfg.kind = InputKind::Barcodes;
    cfg.m_policy = tropitest::tropical::MPolicy::Universal;
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("embedding:"), "{err}");
    assert!(matches!(err.root(), Error::Regularization { required: 500, .. }));
    assert_eq!(err.exit_code(), 2);

    cfg.clip = true;
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.collections.a.clipped, 1);
    assert_eq!(report.m, 100);

    cfg.out = Some(dir.path().join("missing/dir/report.json"));
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("report:"), "{err}");
    assert!(err.to_string().contains("missing/dir/report.json"), "{err}");

    let mut bad = cfg.clone();
    bad.kind = InputKind::Pointclouds;
    let err = run_pipeline(&bad).unwrap_err();
    assert!(err.to_string().starts_with("load a:"), "{err}");
}
