use std::path::Path;

use pretrain_feasibility::catalog::{Catalog, Role};
use pretrain_feasibility::graph::write_edge_list;
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::Graphon;

fn node_file(dir: &Path, name: &str, n: usize) {
    let g = sample_graph(&Graphon::constant(1, 0.1).unwrap(), n, 1);
    write_edge_list(&g, dir.join(name)).unwrap();
}

fn parse(dir: &Path, text: &str) -> pretrain_feasibility::Result<Catalog> {
    Catalog::parse(text, dir, &dir.join("catalog.toml"))
}

const TWO_NODE_SETS: &str = r#"
seed = 4
[ego]
pretrain_sample = 7

[[datasets]]
name = "a"
domain = "web"
task = "node"
paths = ["a.edgelist"]

[[datasets]]
name = "b"
domain = "bio"
task = "node"
paths = ["b.edgelist"]
ego = { sample = 3 }
"#;

#[test]
fn node_tasks_materialize_as_ego_nets() {
    let tmp = tempfile::tempdir().unwrap();
    node_file(tmp.path(), "a.edgelist", 30);
    node_file(tmp.path(), "b.edgelist", 20);
    let cat = parse(tmp.path(), TWO_NODE_SETS).unwrap();
    assert_eq!(cat.materialize("a", Role::Pretrain, 4).unwrap().len(), 7);
    assert_eq!(cat.materialize("a", Role::Downstream, 4).unwrap().len(), 30);
    assert_eq!(cat.materialize("b", Role::Pretrain, 4).unwrap().len(), 3);
    assert_eq!(cat.materialize_with("a", Role::Downstream, 4, Some(0.1)).unwrap().len(), 3);
    assert!(cat.materialize_with("a", Role::Downstream, 4, Some(1.5)).is_err());
    let splits = cat.pretrain_splits(&["a".into(), "b".into()], 4).unwrap();
    assert_eq!(splits.keys().collect::<Vec<_>>(), ["bio", "web"]);
    assert_eq!(
        cat.materialize("a", Role::Pretrain, 4).unwrap(),
        cat.materialize("a", Role::Pretrain, 4).unwrap()
    );
}

#[test]
fn hashes_track_file_contents() {
    let tmp = tempfile::tempdir().unwrap();
    node_file(tmp.path(), "a.edgelist", 30);
    node_file(tmp.path(), "b.edgelist", 20);
    std::fs::write(tmp.path().join("catalog.toml"), TWO_NODE_SETS).unwrap();
    let cat = Catalog::load(tmp.path().join("catalog.toml")).unwrap();
    let before = cat.input_hashes(&["a".into()]).unwrap();
    std::fs::write(tmp.path().join("a.edgelist"), "0 1\n").unwrap();
    assert_ne!(before, cat.input_hashes(&["a".into()]).unwrap());
}

#[test]
fn duplicate_names_fail_fast() {
    let tmp = tempfile::tempdir().unwrap();
    node_file(tmp.path(), "a.edgelist", 10);
    node_file(tmp.path(), "b.edgelist", 10);
    let text = TWO_NODE_SETS.replace("name = \"b\"", "name = \"a\"");
    assert!(parse(tmp.path(), &text).is_err());
}

#[test]
fn missing_files_fail_fast() {
    let tmp = tempfile::tempdir().unwrap();
    node_file(tmp.path(), "a.edgelist", 10);
    assert!(parse(tmp.path(), TWO_NODE_SETS).is_err());
}

#[test]
fn node_task_needs_exactly_one_file() {
    let tmp = tempfile::tempdir().unwrap();
    node_file(tmp.path(), "a.edgelist", 10);
    node_file(tmp.path(), "b.edgelist", 10);
    let text = TWO_NODE_SETS.replace("paths = [\"b.edgelist\"]", "paths = [\"a.edgelist\", \"b.edgelist\"]");
    assert!(parse(tmp.path(), &text).is_err());
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(parse(tmp.path(), "seed = 1\ncolour = \"red\"\n").is_err());
}
