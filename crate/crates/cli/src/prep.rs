//! Dataset preprocessing: converts raw distributions into the
//! one-document-per-line corpus and aligned label files the trainer expects.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

#[derive(Args)]
pub struct PrepArgs {
    /// Root of the extracted raw distribution.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for the generated corpus and label files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// One message per file under `<split>/<class>/<id>`; headers (everything up
/// to the first blank line) are dropped and the body is flattened onto a
/// single line. Files are visited in sorted order so output is stable.
pub fn prep_20ng(args: &PrepArgs) -> Result<()> {
    let train_dir = find_dir(&args.input, &["20news-bydate-train", "train"])?;
    let test_dir = find_dir(&args.input, &["20news-bydate-test", "test"])?;
    fs::create_dir_all(&args.out_dir)?;
    let n_train = convert_split(&train_dir, &args.out_dir, "train", strip_message)?;
    let n_test = convert_split(&test_dir, &args.out_dir, "test", strip_message)?;
    println!("train_docs={n_train}");
    println!("test_docs={n_test}");
    println!("out_dir={}", args.out_dir.display());
    Ok(())
}

/// Movie review polarity: `txt_sentoken/{pos,neg}/*.txt`, one review per
/// file, already cleaned; bodies are flattened onto single lines.
pub fn prep_polarity(args: &PrepArgs) -> Result<()> {
    let root = if args.input.join("txt_sentoken").is_dir() {
        args.input.join("txt_sentoken")
    } else {
        args.input.clone()
    };
    if !root.join("pos").is_dir() || !root.join("neg").is_dir() {
        bail!(
            "expected pos/ and neg/ under {} (or under txt_sentoken/)",
            args.input.display()
        );
    }
    fs::create_dir_all(&args.out_dir)?;
    let mut corpus = fs::File::create(args.out_dir.join("reviews.txt"))?;
    let mut labels = fs::File::create(args.out_dir.join("reviews.labels"))?;
    let mut count = 0usize;
    for class in ["neg", "pos"] {
        for path in sorted_files(&root.join(class))? {
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            writeln!(corpus, "{}", flatten(&text))?;
            writeln!(labels, "{class}")?;
            count += 1;
        }
    }
    println!("docs={count}");
    println!("out_dir={}", args.out_dir.display());
    Ok(())
}

fn find_dir(root: &Path, candidates: &[&str]) -> Result<PathBuf> {
    for c in candidates {
        let p = root.join(c);
        if p.is_dir() {
            return Ok(p);
        }
    }
    // the root itself may already be the split directory
    bail!(
        "none of {candidates:?} found under {}; point --input at the extracted distribution",
        root.display()
    )
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn convert_split(
    split_dir: &Path,
    out_dir: &Path,
    name: &str,
    clean: fn(&str) -> String,
) -> Result<usize> {
    let mut corpus = fs::File::create(out_dir.join(format!("{name}.txt")))?;
    let mut labels = fs::File::create(out_dir.join(format!("{name}.labels")))?;
    let mut count = 0usize;
    for class_dir in sorted_dirs(split_dir)? {
        let class = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_default();
        for path in sorted_files(&class_dir)? {
            // a few messages carry non-UTF-8 bytes; replace rather than fail
            let raw = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let text = String::from_utf8_lossy(&raw);
            writeln!(corpus, "{}", clean(&text))?;
            writeln!(labels, "{class}")?;
            count += 1;
        }
    }
    if count == 0 {
        bail!("no documents found under {}", split_dir.display());
    }
    Ok(count)
}

/// Drops the RFC-822-style header block and trailing signature ("--" line
/// onward), then flattens whitespace to one line.
fn strip_message(text: &str) -> String {
    let mut lines: Vec<&str> = text.lines().collect();
    if let Some(blank) = lines.iter().position(|l| l.trim().is_empty()) {
        lines.drain(..=blank);
    }
    if let Some(sig) = lines.iter().position(|l| l.trim() == "--") {
        lines.truncate(sig);
    }
    flatten(&lines.join(" "))
}

fn flatten(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
