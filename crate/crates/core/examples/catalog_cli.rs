//! End-to-end command-line run: write a small catalog to a temporary
//! directory, then call `feasibility` and `select` through the CLI entry point.

use pretrain_feasibility::cli::run;
use pretrain_feasibility::graph::write_edge_list;
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::{derive_seed, Graphon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    let mut toml = String::from("seed = 1\n");
    for (name, p) in [("low", 0.2), ("high", 0.8), ("mid", 0.5)] {
        let sub = dir.join(name);
        std::fs::create_dir_all(&sub)?;
        let w = Graphon::constant(1, p)?;
        let mut index = String::new();
        for i in 0..10 {
            let file = format!("{i}.edgelist");
            write_edge_list(&sample_graph(&w, 60, derive_seed(p.to_bits(), i)), sub.join(&file))?;
            index.push_str(&file);
            index.push('\n');
        }
        std::fs::write(sub.join("index.txt"), index)?;
        toml.push_str(&format!(
            "\n[[datasets]]\nname = \"{name}\"\ndomain = \"{name}\"\ntask = \"graph\"\npaths = [\"{name}\"]\n"
        ));
    }
    let catalog = dir.join("catalog.toml");
    std::fs::write(&catalog, toml)?;
    let catalog = catalog.to_str().unwrap();

    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    for args in [
        vec!["pfeas", "feasibility", "--catalog", catalog, "--downstream", "mid", "--resolution", "8"],
        vec!["pfeas", "select", "--catalog", catalog, "--downstream", "mid", "--budget", "1", "--resolution", "8"],
    ] {
        let code = run(args, &mut stdout, &mut stderr);
        if code != 0 {
            return Err(format!("exit code {code}").into());
        }
    }
    Ok(())
}
