use nglab::core::linalg::Matrix;
use nglab::io::{decode_ngl1, format_csv, load_matrix, parse_csv, save_csv, save_ngl1, write_ngl1};
use nglab::Error;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(any::<f64>(), rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

fn sized() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..9).prop_flat_map(|(r, c)| matrix(r, c))
}

fn bits(m: &Matrix) -> Vec<u64> {
    m.as_slice().iter().map(|x| x.to_bits()).collect()
}

#[test]
fn ngl1_is_row_major() {
    let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
    let mut buf = Vec::new();
    write_ngl1(&mut buf, &m).unwrap();
    let body: Vec<f64> = buf[20..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(body, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 3);
}

#[test]
fn bad_headers_rejected() {
    assert!(decode_ngl1(b"NGL2\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0").is_err());
    assert!(decode_ngl1(b"NGL1").is_err());
    let mut huge = b"NGL1".to_vec();
    huge.extend(u64::MAX.to_le_bytes());
    huge.extend(u64::MAX.to_le_bytes());
    assert!(decode_ngl1(&huge).is_err());
}

#[test]
fn load_dispatches_on_magic() {
    let dir = tempfile::tempdir().unwrap();
    let m = Matrix::from_rows(&[[0.5, -1.25], [3.0, 1e-300]]).unwrap();
    let (a, b) = (dir.path().join("m.ngl"), dir.path().join("m.csv"));
    save_ngl1(&a, &m).unwrap();
    save_csv(&b, &m).unwrap();
    assert_eq!(load_matrix(&a).unwrap(), m);
    assert_eq!(load_matrix(&b).unwrap(), m);
}

#[test]
fn load_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "1,2\nx,3\n").unwrap();
    match load_matrix(&p) {
        Err(Error::Format { path, msg }) => {
            assert_eq!(path, p);
            assert!(msg.contains("line 2"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(load_matrix(&dir.path().join("missing.ngl")), Err(Error::Io { .. })));
}

#[test]
fn blank_csv_lines_skipped() {
    assert_eq!(parse_csv("1,2\n\n3,4\n").unwrap().shape(), (2, 2));
    assert!(parse_csv("\n\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ngl1_round_trip_is_bit_exact(m in sized()) {
        let mut buf = Vec::new();
        write_ngl1(&mut buf, &m).unwrap();
        prop_assert_eq!(buf.len(), 20 + 8 * m.nrows() * m.ncols());
        let back = decode_ngl1(&buf).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        prop_assert_eq!(bits(&back), bits(&m));
    }

    #[test]
    fn csv_round_trip_is_exact(v in proptest::collection::vec(-1e300f64..1e300, 1..30), cols in 1usize..5) {
        let rows = v.len() / cols;
        prop_assume!(rows > 0);
        let m = Matrix::from_vec(rows, cols, v[..rows * cols].to_vec()).unwrap();
        let back = parse_csv(&format_csv(&m)).unwrap();
        prop_assert_eq!(bits(&back), bits(&m));
    }

    #[test]
    fn truncation_always_detected(m in sized(), cut in 1usize..9) {
        let mut buf = Vec::new();
        write_ngl1(&mut buf, &m).unwrap();
        buf.truncate(buf.len() - cut);
        prop_assert!(decode_ngl1(&buf).is_err());
    }
}
