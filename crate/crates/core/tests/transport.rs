use std::path::{Path, PathBuf};

use fedboost::config::RunConfig;
use fedboost::pipeline::{repro, Transport};

fn tiny(out: &Path) -> RunConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/tiny.toml");
    let mut config = RunConfig::load(path).unwrap();
    config.out = out.to_path_buf();
    config
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn socket_and_in_process_outputs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mem = tiny(&tmp.path().join("mem"));
    let tcp = tiny(&tmp.path().join("tcp"));
    repro(&mem, &Transport::InProcess).unwrap();
    repro(
        &tcp,
        &Transport::Sockets {
            site_exe: PathBuf::from(env!("CARGO_BIN_EXE_fedboost")),
        },
    )
    .unwrap();

    let listed = files(&mem.out);
    assert_eq!(listed, files(&tcp.out));
    let mut compared = 0;
    for f in &listed {
        // the manifest records the transport and output path
        if f.file_name().unwrap() == "manifest.json" {
            continue;
        }
        let a = std::fs::read(mem.out.join(f)).unwrap();
        let b = std::fs::read(tcp.out.join(f)).unwrap();
        assert!(a == b, "{} differs between transports", f.display());
        compared += 1;
    }
    assert!(listed.iter().filter(|f| f.ends_with("selection.csv")).count() == 8);
    assert!(compared > 20);
}
