use feec::mm;
use feec_core::linalg::{SparseMatrix, TripletBuilder};
use proptest::prelude::*;

proptest! {
    #[test]
    fn write_then_read_is_lossless(
        entries in prop::collection::vec((0usize..7, 0usize..5, -1e6f64..1e6), 0..30),
        tiny in -1e-300f64..1e-300,
    ) {
        let mut b = TripletBuilder::new(7, 5);
        for (i, j, v) in &entries {
            b.push(*i, *j, *v);
        }
        b.push(6, 4, tiny);
        let m = b.build();
        let back = mm::parse(mm::to_string(&m).as_bytes()).unwrap();
        prop_assert_eq!((back.nrows(), back.ncols()), (7, 5));
        prop_assert_eq!(back.max_abs_diff(&m).unwrap(), 0.0);
    }
}

#[test]
fn symmetric_and_pattern_storage_is_expanded() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2.0\n3 1 -1.5\n2 2 4\n";
    let m = mm::parse(text.as_bytes()).unwrap();
    assert_eq!(m.get(0, 2), -1.5);
    assert_eq!(m.get(2, 0), -1.5);
    assert_eq!(m.nnz(), 4);
    let p = mm::parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n".as_bytes()).unwrap();
    assert_eq!(p.get(1, 0), 1.0);
    let skew = mm::parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n".as_bytes()).unwrap();
    assert_eq!((skew.get(1, 0), skew.get(0, 1)), (3.0, -3.0));
    assert_eq!(SparseMatrix::identity(3).nnz(), mm::parse(mm::to_string(&SparseMatrix::identity(3)).as_bytes()).unwrap().nnz());
}

#[test]
fn malformed_input_is_rejected() {
    for text in [
        "",
        "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
        "%%MatrixMarket matrix coordinate real general\n2 2\n",
    ] {
        assert!(mm::parse(text.as_bytes()).is_err(), "{text:?}");
    }
}
