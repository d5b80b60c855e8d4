use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tvr_core::io::write_png;
use tvr_core::Image;

fn tvr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvr"))
        .args(args)
        .output()
        .expect("tvr binary runs")
}

fn photo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/photos/photo_03.png")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn resurface_writes_four_artifacts() {
    let out = tempfile::tempdir().unwrap();
    let res = tvr(&["resurface", s(&photo()), "-o", s(out.path()), "--block-size", "28"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["reconstructed.png", "cropped.png", "mask.png", "surface.json"] {
        assert!(out.path().join(name).is_file(), "missing {name}");
    }
    let surface = tvr_core::SurfaceExport::read(&out.path().join("surface.json")).unwrap();
    assert_eq!((surface.block_size, surface.nrow), (28, 8));
}

#[test]
fn non_dividing_block_size_is_processing_error() {
    let out = tempfile::tempdir().unwrap();
    let res = tvr(&["resurface", s(&photo()), "-o", s(out.path()), "--block-size", "30"]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("30") && stderr.contains("224"), "{stderr}");
    // nothing written on failure
    assert_eq!(std::fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(tvr(&["resurface"]).status.code(), Some(1));
    assert_eq!(tvr(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        tvr(&["resurface", "x.png", "-o", "o", "--inpaint", "gan"])
            .status
            .code(),
        Some(1)
    );
    let help = tvr(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("sweep"));
}

#[test]
fn missing_input_is_processing_error() {
    let out = tempfile::tempdir().unwrap();
    let res = tvr(&["surface", "/nonexistent/x.png", "-o", s(out.path())]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn inject_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.png");
    write_png(&Image::filled(224, 0.5).unwrap(), &base).unwrap();
    let inject = dir.path().join("inject");
    let res = tvr(&[
        "inject",
        s(&base),
        "-o",
        s(&inject),
        "--area-fraction",
        "0.015625",
        "--at",
        "56,112",
        "--seed",
        "4",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let eval = dir.path().join("eval");
    let res = tvr(&[
        "eval",
        s(&inject.join("patched.png")),
        "--truth",
        s(&inject.join("truth.png")),
        "-o",
        s(&eval),
        "--inpaint",
        "mean-fill",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: tvr_core::DetectionReport =
        serde_json::from_slice(&std::fs::read(eval.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.true_patch_blocks, vec![2 * 8 + 4]);
    assert_eq!(report.recall, 1.0);
    assert_eq!(report.precision, 1.0);
    assert_eq!(report.residual_overlap, 0.0);
}

#[test]
fn sweep_emits_one_report_per_size() {
    let out = tempfile::tempdir().unwrap();
    let res = tvr(&["sweep", s(&photo()), "-o", s(out.path()), "--inpaint", "mean-fill"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for k in [7, 14, 28, 56, 112] {
        let text = std::fs::read_to_string(out.path().join(format!("report-k{k}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["block_size"], k);
        assert_eq!(v["nrow"], 224 / k);
        assert!(v["detection"].is_null());
    }
    assert_eq!(std::fs::read_dir(out.path()).unwrap().count(), 5);
}

#[test]
fn directory_batch_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    for name in ["a", "b"] {
        std::fs::copy(photo(), input.join(format!("{name}.png"))).unwrap();
    }
    std::fs::write(input.join("notes.txt"), "skip me").unwrap();
    let out = dir.path().join("out");
    let res = tvr(&["surface", s(&input), "-o", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let a = std::fs::read(out.join("a/surface.json")).unwrap();
    let b = std::fs::read(out.join("b/surface.json")).unwrap();
    assert_eq!(a, b);
}

#[cfg(unix)]
mod bridge {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("gen.sh");
        std::fs::write(&path, format!("#!/bin/sh\nset -e\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    /// Grey image with one noise patch, so something is always flagged.
    fn patched_input(dir: &Path) -> PathBuf {
        let spec = tvr_core::PatchSpec::new(1, 0.06, 5);
        let (x, _) = tvr_core::inject_patches(&Image::filled(224, 0.5).unwrap(), &spec).unwrap();
        let path = dir.join("patched.png");
        write_png(&x, &path).unwrap();
        path
    }

    #[test]
    fn external_generator_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let input = patched_input(dir.path());
        // echoing the cropped image back makes the result equal the cropped image
        let gen = script(dir.path(), r#"cp "$1/cropped.png" "$1/generated.png""#);
        let out = dir.path().join("out");
        let tmp = dir.path().join("tmp");
        std::fs::create_dir(&tmp).unwrap();
        let res = Command::new(env!("CARGO_BIN_EXE_tvr"))
            .args([
                "resurface",
                s(&input),
                "-o",
                s(&out),
                "--inpaint",
                "external",
                "--generator",
                s(&gen),
            ])
            .env("TVR_BRIDGE_TMPDIR", &tmp)
            .output()
            .unwrap();
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let (_, mask) = tvr_core::io::read_binary_png(&out.join("mask.png")).unwrap();
        assert!(mask.iter().any(|b| *b), "nothing was masked");
        assert_eq!(
            std::fs::read(out.join("reconstructed.png")).unwrap(),
            std::fs::read(out.join("cropped.png")).unwrap()
        );
        // the per-call workspace is cleaned up
        assert_eq!(std::fs::read_dir(&tmp).unwrap().count(), 0);
    }

    #[test]
    fn failing_generator_is_processing_error() {
        let dir = tempfile::tempdir().unwrap();
        let gen = script(dir.path(), "echo broken >&2\nexit 3");
        let input = patched_input(dir.path());
        let out = dir.path().join("out");
        let res = tvr(&[
            "resurface",
            s(&input),
            "-o",
            s(&out),
            "--inpaint",
            "external",
            "--generator",
            s(&gen),
        ]);
        assert_eq!(res.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&res.stderr).contains("broken"));
        assert!(!out.join("reconstructed.png").exists());
    }
}
