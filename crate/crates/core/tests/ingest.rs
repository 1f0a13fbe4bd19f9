use ipod::data::{self, ingest_csv, YColumn};
use ipod::IpodError;

#[test]
fn embedded_datasets_have_expected_shapes() {
    let hbk = data::hbk();
    assert_eq!((hbk.n(), hbk.x_names.len()), (75, 3));
    assert_eq!(hbk.y_name, "Y");
    assert_eq!(data::telef().n(), 24);
    assert_eq!(data::stars().n(), 47);
    for name in data::BUILTIN_NAMES {
        assert!(data::builtin(name).is_some());
    }
}

#[test]
fn string_cell_reports_row_and_column() {
    let csv = "a,b,y\n1,2,3\n4,oops,6\n";
    match ingest_csv(csv.as_bytes(), &YColumn::Last, "t") {
        Err(IpodError::Ingest { row, column, .. }) => assert_eq!((row, column), (2, 2)),
        other => panic!("expected ingest error, got {other:?}"),
    }
}

#[test]
fn too_few_rows_is_a_dimension_error() {
    let header: Vec<String> = (0..10).map(|j| format!("x{j}")).chain(["y".into()]).collect();
    let mut csv = header.join(",") + "\n";
    for i in 0..5 {
        let row: Vec<String> = (0..11).map(|j| ((i * 11 + j) % 7).to_string()).collect();
        csv += &(row.join(",") + "\n");
    }
    let ds = ingest_csv(csv.as_bytes(), &YColumn::Last, "wide").unwrap();
    assert!(matches!(ds.problem(false), Err(IpodError::TooFewCases { .. })));
}

#[test]
fn response_can_be_chosen_by_name_or_index() {
    let csv = "y,a,b\n1,2,3\n4,5,7\n2,2,2\n";
    let by_name = ingest_csv(csv.as_bytes(), &"y".parse().unwrap(), "t").unwrap();
    let by_index = ingest_csv(csv.as_bytes(), &"0".parse().unwrap(), "t").unwrap();
    assert_eq!(by_name.y, by_index.y);
    assert_eq!(by_name.x_names, vec!["a", "b"]);
    assert!(ingest_csv(csv.as_bytes(), &YColumn::Name("z".into()), "t").is_err());
}
