use std::fs;

use randnla::synth::blobs;
use randnla::DenseMatrix;
use randnla_cli::io::{load_matrix, save_matrix, Format};

#[test]
fn identity_roundtrips_bit_exactly_in_array_format() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("eye.mtx");
    let eye = DenseMatrix::identity(2);
    save_matrix(&eye, &p, None).unwrap();
    assert!(fs::read_to_string(&p).unwrap().starts_with("%%MatrixMarket matrix array real general"));
    let back = load_matrix(&p, None).unwrap();
    assert_eq!(back, eye);
}

#[test]
fn coordinate_file_densifies_to_its_entries() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.mtx");
    fs::write(
        &p,
        "%%MatrixMarket matrix coordinate real general\n% three entries\n4 5 3\n1 1 2.5\n4 2 -1\n2 5 1e-3\n",
    )
    .unwrap();
    let m = load_matrix(&p, None).unwrap();
    assert_eq!(m.shape(), (4, 5));
    let nnz = m.as_column_major().iter().filter(|v| **v != 0.0).count();
    assert_eq!(nnz, 3);
    assert_eq!(m.get(3, 1), -1.0);
    assert_eq!(m.get(1, 4), 1e-3);
}

#[test]
fn coordinate_output_lists_only_nonzeros() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.mtx");
    let m = DenseMatrix::from_row_major(2, 3, vec![0.0, 1.5, 0.0, -2.0, 0.0, 0.0]).unwrap();
    save_matrix(&m, &p, Some(Format::Coordinate)).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    assert!(text.lines().nth(1).unwrap() == "2 3 2");
    assert_eq!(load_matrix(&p, None).unwrap(), m);
}

#[test]
fn blob_dataset_survives_csv() {
    let centers = vec![vec![0.0, 0.0, 1.0], vec![5.0, 5.0, -1.0]];
    let (x, _) = blobs(&centers, 40, 0.8, 3);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("blobs.csv");
    save_matrix(&x, &p, None).unwrap();
    let back = load_matrix(&p, None).unwrap();
    assert_eq!(back.shape(), (80, 3));
    assert_eq!(back.as_column_major().iter().filter(|v| v.is_finite()).count(), 240);
    assert_eq!(back, x);
}

#[test]
fn unknown_extension_needs_a_format() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.dat");
    let m = DenseMatrix::identity(2);
    assert!(save_matrix(&m, &p, None).is_err());
    save_matrix(&m, &p, Some(Format::Csv)).unwrap();
    assert_eq!(load_matrix(&p, Some(Format::Csv)).unwrap(), m);
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_matrix(&dir.path().join("absent.mtx"), None).unwrap_err();
    assert!(err.to_string().contains("absent.mtx"));
}
