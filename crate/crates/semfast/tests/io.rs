use std::fs;

use semfast::costs::DenseCosts;
use semfast::io::*;
use semfast::Error;
use semfast_core::eval::{achieved_speedup, instability_index, MetricsReport};
use semfast_core::{Dims, Frame, Roi};

fn dims() -> Dims {
    Dims {
        width: 8,
        height: 6,
    }
}

fn gray(k: usize, v: u8) -> Frame {
    Frame::from_gray(k, 8, 6, (0..48).map(|p| v.wrapping_add(p as u8)).collect()).unwrap()
}

#[test]
fn frames_round_trip_in_numeric_order() {
    let dir = tempfile::tempdir().unwrap();
    let frames: Vec<Frame> = (0..12).map(|k| gray(k, 10 * k as u8)).collect();
    write_image_sequence(dir.path(), "frame", &frames).unwrap();
    // an unpadded name must still sort numerically
    fs::rename(dir.path().join("frame_000011.png"), dir.path().join("frame_99.png")).unwrap();
    let seq = load_image_sequence(dir.path(), "*.png").unwrap();
    assert_eq!(seq.len(), 12);
    for (k, f) in seq.frames().iter().enumerate() {
        assert_eq!(f.gray(), frames[k].gray());
        assert_eq!(f.index, k);
    }
    assert_eq!(seq.frames()[11].source_index, 99);

    let rgb: Vec<u8> = (0..48 * 3).map(|p| (p * 5) as u8).collect();
    let color = Frame::from_rgb(0, 8, 6, rgb.clone()).unwrap();
    let cdir = dir.path().join("color");
    write_image_sequence(&cdir, "c", &[color.clone(), color]).unwrap();
    let back = load_image_sequence(&cdir, "*.png").unwrap();
    assert_eq!(back.frames()[1].color(), Some(&rgb[..]));
}

#[test]
fn frame_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_image_sequence(dir.path(), "*.png"),
        Err(Error::EmptySequence(_))
    ));
    write_image_sequence(dir.path(), "a", &[gray(0, 0)]).unwrap();
    let big = Frame::from_gray(0, 9, 6, vec![0; 54]).unwrap();
    write_image_sequence(&dir.path().join("b"), "a", &[big]).unwrap();
    fs::rename(dir.path().join("b/a_000000.png"), dir.path().join("a_000001.png")).unwrap();
    assert!(matches!(
        load_image_sequence(dir.path(), "*.png"),
        Err(Error::DimensionMismatch { found: (9, 6), .. })
    ));
    fs::remove_file(dir.path().join("a_000001.png")).unwrap();
    fs::write(dir.path().join("a_000002.png"), b"not a png").unwrap();
    assert!(matches!(load_image_sequence(dir.path(), "*.png"), Err(Error::Decode { .. })));
}

#[test]
fn labels_round_trip_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.jsonl");
    let roi = Roi {
        x: 1,
        y: 1,
        w: 3,
        h: 2,
        confidence: 0.5,
    };
    let labels = vec![vec![], vec![roi], vec![], vec![roi, roi]];
    write_roi_labels(&path, &labels).unwrap();
    assert_eq!(load_roi_labels(&path, 4, dims()).unwrap(), labels);

    fs::write(&path, "{\"frame\": 7, \"rois\": []}\n").unwrap();
    assert!(matches!(
        load_roi_labels(&path, 4, dims()),
        Err(Error::OutOfRangeFrame { frame: 7, line: 1, .. })
    ));
    fs::write(&path, "\n{\"frame\": 0, \"rois\": [{\"x\": 6, \"y\": 0, \"w\": 5, \"h\": 1, \"conf\": 1}]}\n").unwrap();
    assert!(matches!(
        load_roi_labels(&path, 4, dims()),
        Err(Error::InvalidRoi { line: 2, .. })
    ));
    fs::write(&path, "{\"frame\": 0\n").unwrap();
    assert!(matches!(load_roi_labels(&path, 4, dims()), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn scores_are_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let scores = vec![0.0, 1.0 / 3.0, 1e-300, 12345.678901234567];
    write_scores(&path, &scores).unwrap();
    assert_eq!(read_scores(&path).unwrap(), scores);
    fs::write(&path, "frame,score\n0,1\n2,3\n").unwrap();
    assert!(matches!(read_scores(&path), Err(Error::Parse { line: 3, .. })));
    fs::write(&path, "0,1\n").unwrap();
    assert!(read_scores(&path).is_err());
}

#[test]
fn index_files_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("sel.txt");
    write_index_file(&idx, &[3, 9, 27]).unwrap();
    assert_eq!(read_index_file(&idx).unwrap(), vec![3, 9, 27]);

    let frames: Vec<Frame> = (0..6).map(|k| gray(k, k as u8)).collect();
    let m = MetricsReport {
        achieved_speedup: achieved_speedup(60, 6).unwrap(),
        semantic_content: 12.5,
        instability: instability_index(&frames, 5).unwrap(),
    };
    let (json, csv) = (dir.path().join("m.json"), dir.path().join("m.csv"));
    write_metrics(&json, &csv, &m).unwrap();
    let back: MetricsReport = read_json(&json).unwrap();
    assert_eq!(back, m);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some(METRICS_CSV_HEADER));
    assert_eq!(text.lines().nth(1).unwrap(), metrics_csv_row(&m));
}

#[test]
fn cost_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("costs.bin");
    let n = 7;
    let tau = 3;
    let pairs: usize = (0..n).map(|i: usize| (n - 1 - i).min(tau)).sum();
    let data: Vec<[f32; 3]> = (0..pairs).map(|k| [k as f32, 0.5, -(k as f32)]).collect();
    let costs = DenseCosts::from_raw(n, tau, data);
    write_cost_cache(&path, &costs).unwrap();
    let back = read_cost_cache(&path).unwrap();
    assert_eq!(back.n(), n);
    assert_eq!(back.tau_max(), tau);
    assert_eq!(back.raw(), costs.raw());
    fs::write(&path, b"SFCOST01").unwrap();
    assert!(read_cost_cache(&path).is_err());
}
