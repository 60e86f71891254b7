use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seqlabel::corpus::{write_column_corpus, Sentence};
use seqlabel::synthetic::separable_corpus;

fn seqlabel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqlabel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_labeled(path: &Path, sentences: &[Sentence]) {
    let labels: Vec<Vec<String>> = sentences.iter().map(|s| s.gold_labels.clone().unwrap()).collect();
    let mut buf = Vec::new();
    write_column_corpus(&mut buf, sentences, &labels).unwrap();
    std::fs::write(path, buf).unwrap();
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (train, dev) = separable_corpus(3);
        write_labeled(&dir.path().join("train.tsv"), &train);
        write_labeled(&dir.path().join("dev.tsv"), &dev);
        std::fs::write(
            dir.path().join("seg_train.txt"),
            "我们 喜欢 北京\n北京 很 大\n我们 去 北京\n他 喜欢 我们\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("seg_dev.txt"), "他 去 北京\n我们 很 喜欢\n").unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn train_pos(&self, mode: &str, out: &str, extra: &[&str]) -> Output {
        let (train, dev, out) = (self.p("train.tsv"), self.p("dev.tsv"), self.p(out));
        let mut args = vec![
            "train", "--task", "pos", "--mode", mode, "--train", &train, "--dev", &dev, "--model-out", &out,
        ];
        args.extend_from_slice(extra);
        seqlabel(&args)
    }
}

#[test]
fn train_seg_discrete_writes_checkpoint_and_reports_dev_f() {
    let w = Workspace::new();
    let (tr, dv, out) = (w.p("seg_train.txt"), w.p("seg_dev.txt"), w.p("seg.model"));
    let o = seqlabel(&[
        "train", "--task", "seg", "--mode", "discrete", "--format", "segmented", "--train", &tr, "--dev", &dv,
        "--model-out", &out, "--epochs", "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("dev f1"), "{}", stdout(&o));
    assert!(w.path("seg.model").is_file());
    let report = std::fs::read_to_string(w.path("seg.report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 5);
}

#[test]
fn missing_dev_file_fails_before_training() {
    let w = Workspace::new();
    let (tr, out) = (w.p("train.tsv"), w.p("m.model"));
    let gone = w.p("nope.tsv");
    let o = seqlabel(&["train", "--task", "pos", "--train", &tr, "--dev", &gone, "--model-out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`dev` file"), "{}", stderr(&o));
    assert!(!w.path("m.model").exists());
}

#[test]
fn identical_runs_write_identical_artifacts() {
    let w = Workspace::new();
    let small = ["--epochs", "2", "--word-hidden", "6", "--word-emb", "4", "--char-emb", "3", "--seed", "7"];
    for out in ["a.model", "b.model"] {
        let o = w.train_pos("joint", out, &small);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |n: &str| std::fs::read(w.path(n)).unwrap();
    assert_eq!(read("a.model"), read("b.model"));
    assert_eq!(read("a.report.jsonl"), read("b.report.jsonl"));
}

#[test]
fn predict_reproduces_separable_training_labels() {
    let w = Workspace::new();
    assert!(w.train_pos("discrete", "d.model", &["--epochs", "10"]).status.success());
    let (m, input, out) = (w.p("d.model"), w.p("train.tsv"), w.p("pred.tsv"));
    let o = seqlabel(&["predict", "--model", &m, "--input", &input, "--output", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&input).unwrap());

    std::fs::write(w.path("empty.tsv"), "").unwrap();
    let empty = w.p("empty.tsv");
    let o = seqlabel(&["predict", "--model", &m, "--input", &empty]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let o = seqlabel(&["predict", "--model", &m, "--input", &input, "--task", "ner"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("trained for pos"), "{}", stderr(&o));

    let mut bytes = std::fs::read(w.path("d.model")).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    std::fs::write(w.path("bad.model"), bytes).unwrap();
    let bad = w.p("bad.model");
    let o = seqlabel(&["predict", "--model", &bad, "--input", &input]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn eval_and_compare_on_identical_inputs() {
    let w = Workspace::new();
    let dev = w.p("dev.tsv");
    let o = seqlabel(&["eval", "--task", "pos", "--gold", &dev, "--pred", &dev]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["value"], 1.0);
    assert_eq!(rec["metric"], "accuracy");

    assert!(w.train_pos("discrete", "d.model", &["--epochs", "2"]).status.success());
    let m = w.p("d.model");
    let o = seqlabel(&["compare", "--model", &m, "--model-b", &m, "--gold", &dev]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 20);
    for (k, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[0], k.to_string());
        assert_eq!(cols[1], cols[2]);
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let w = Workspace::new();
    let conf = format!(
        "task = pos\nmode = discrete\ntrain = {}\ndev = {}\nmodel-out = {}\nepochs = 4\n",
        w.p("train.tsv"),
        w.p("dev.tsv"),
        w.p("c.model")
    );
    std::fs::write(w.path("run.conf"), conf).unwrap();
    let c = w.p("run.conf");
    let o = seqlabel(&["train", "--config", &c, "--epochs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("of 2"), "{}", stdout(&o));
}

#[test]
fn gradcheck_reports_per_class_errors() {
    let o = seqlabel(&["gradcheck"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["passed"], true);
    assert_eq!(rec["report"]["classes"].as_array().unwrap().len(), 8);

    let o = seqlabel(&["gradcheck", "--tolerance", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
}
