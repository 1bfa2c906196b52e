use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
seed = 5
[grid]
nx = 16
ny = 16
zoom_nx = 6
zoom_ny = 6
nt = 8
[sampling]
n_train = 6
n_test = 3
[model]
variant = Conv3D
regularization = BN
kernel = 3
filters = 3
blocks = 2
lift_width = 4
fc_width = 8
fc_depth = 2
[train]
epochs = 3
batch_size = 2
[sweep]
variants = Conv2D, Conv2.5D
regularizations = Basic, E
";

fn sepconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("tiny.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    fs::read(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        ok(&sepconv(&["generate", "--config", &cfg, "--seed", "7", "--out", d.to_str().unwrap()]));
    }
    for f in ["train.wds", "test.wds"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    let c = dir.path().join("c");
    ok(&sepconv(&["generate", "--config", &cfg, "--seed", "8", "--out", c.to_str().unwrap()]));
    assert_ne!(read(a.join("train.wds")), read(c.join("train.wds")));
}

#[test]
fn train_is_byte_identical_and_reusable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let data = dir.path().join("data");
    ok(&sepconv(&["generate", "--config", &cfg, "--out", data.to_str().unwrap()]));
    let out = dir.path().join("run");
    let cell = out.join("Conv3D__BN");
    let files = ["model.ckpt", "metrics.csv", "history.csv", "config.cfg"];
    let mut first = Vec::new();
    for pass in 0..2 {
        ok(&sepconv(&[
            "train",
            "--config",
            &cfg,
            "--data",
            data.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
        let bytes: Vec<Vec<u8>> = files.iter().map(|f| read(cell.join(f))).collect();
        if pass == 0 {
            first = bytes;
        } else {
            for (f, (a, b)) in files.iter().zip(first.iter().zip(&bytes)) {
                assert!(a == b, "{f} differs between runs");
            }
        }
    }
    // without --data the same splits are regenerated from the seed
    let r3 = dir.path().join("r3");
    ok(&sepconv(&["train", "--config", &cfg, "--out", r3.to_str().unwrap()]));
    assert!(read(cell.join("model.ckpt")) == read(r3.join("Conv3D__BN").join("model.ckpt")));

    let run_dir = cell;
    let ev = dir.path().join("ev");
    ok(&sepconv(&["evaluate", run_dir.to_str().unwrap(), "--out", ev.to_str().unwrap()]));
    let metrics = String::from_utf8(read(run_dir.join("metrics.csv"))).unwrap();
    let again = String::from_utf8(read(ev.join("results.csv"))).unwrap();
    // same values; classes differ only because evaluate classifies
    let values = |s: &str| -> Vec<String> {
        s.lines().skip(1).map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    assert_eq!(values(&metrics), values(&again));

    let cp = dir.path().join("cp");
    let out = sepconv(&["compress", run_dir.to_str().unwrap(), "--rank", "2", "--out", cp.to_str().unwrap()]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("relative residual"), "{text}");
    assert!(text.contains("test_eps_u"), "{text}");
    let csv = String::from_utf8(read(cp.join("compress.csv"))).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn sweep_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("sw");
    ok(&sepconv(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]));
    let results = String::from_utf8(read(out.join("results.csv"))).unwrap();
    // 2 variants x 2 regularizations x 6 metrics
    assert_eq!(results.lines().count(), 1 + 24);
    assert_eq!(results.lines().filter(|l| l.ends_with(",best")).count(), 6);
    for cell in ["Conv2D__Basic", "Conv2D__E", "Conv2.5D__Basic", "Conv2.5D__E"] {
        assert!(out.join(cell).join("model.ckpt").exists(), "{cell}");
    }
    let merged = dir.path().join("merged");
    let o = sepconv(&[
        "tables",
        out.join("results.csv").to_str().unwrap(),
        out.join("timing.csv").to_str().unwrap(),
        "--out",
        merged.to_str().unwrap(),
    ]);
    ok(&o);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("## epoch_time") && text.contains("## params"), "{text}");
    let merged_csv = String::from_utf8(read(merged.join("results.csv"))).unwrap();
    assert_eq!(merged_csv.lines().count(), 1 + 24 + 4);
}

#[test]
fn batch_norm_with_euler_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("regularization = BN", "regularization = BN&E"));
    let out = sepconv(&["train", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Batch Normalization and Euler"), "{err}");

    let cfg = write_config(dir.path(), TINY);
    let out = sepconv(&["train", "--config", &cfg, "--reg", "BN&E", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(sepconv(&["--help"]).status.code(), Some(0));
    assert_eq!(sepconv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sepconv(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(sepconv(&[]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[grid]\nnx = sixty\n");
    assert_eq!(sepconv(&["generate", "--config", &bad]).status.code(), Some(1));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        sepconv(&["generate", "--config", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );

    let cfg = write_config(dir.path(), TINY);
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = sepconv(&["train", "--config", &cfg, "--data", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = sepconv(&["tables", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
