use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use fsdgpm::checkpoint::Checkpoint;
use fsdgpm::nn::{Batch, Head, HeadMode, Network};
use fsdgpm::numerics::{gaussian_matrix, Rng};
use fsdgpm::subspace::SubspaceMemory;
use fsdgpm_ffi::*;

fn last_error() -> String {
    let p = fsdgpm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn c_path(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn saved_network(dir: &Path, dims: &[usize], mode: HeadMode) -> (Network, CString) {
    let net = Network::new(dims, mode, &mut Rng::new(3)).unwrap();
    let path = dir.join("net.ckpt");
    Checkpoint::from_parts(&net, &SubspaceMemory::empty_for(&net))
        .write(&path)
        .unwrap();
    (net, c_path(&path))
}

#[test]
fn metrics_match_core() {
    let nan = f64::NAN;
    let r = [0.9, nan, nan, 0.8, 0.95, nan, 0.7, 0.85, 0.9];
    let (mut acc, mut bwt) = (0.0, 0.0);
    unsafe {
        assert_eq!(fsdgpm_acc(r.as_ptr(), 3, &mut acc), FsdgpmStatus::Ok);
        assert_eq!(fsdgpm_bwt(r.as_ptr(), 3, &mut bwt), FsdgpmStatus::Ok);
    }
    assert!((acc - (0.7 + 0.85 + 0.9) / 3.0).abs() < 1e-12);
    assert!((bwt - ((0.7 - 0.9) + (0.85 - 0.95)) / 2.0).abs() < 1e-12);
    assert!(fsdgpm_last_error().is_null());

    let one = [0.5];
    let status = unsafe { fsdgpm_bwt(one.as_ptr(), 1, &mut bwt) };
    assert_eq!(status, FsdgpmStatus::UndefinedMetric);
    assert!(last_error().contains("metric undefined"));

    let incomplete = [0.9, nan, 0.8, nan];
    assert_eq!(
        unsafe { fsdgpm_acc(incomplete.as_ptr(), 2, &mut acc) },
        FsdgpmStatus::State
    );
}

#[test]
fn rank_select_and_argument_errors() {
    let sv = [3.0, 1.0, 0.0];
    let mut k = 0;
    unsafe {
        assert_eq!(fsdgpm_rank_select(sv.as_ptr(), 3, 0.9, &mut k), FsdgpmStatus::Ok);
        assert_eq!(k, 1);
        assert_eq!(fsdgpm_rank_select(sv.as_ptr(), 3, 1.0, &mut k), FsdgpmStatus::Ok);
        assert_eq!(k, 2);
        assert_eq!(
            fsdgpm_rank_select(sv.as_ptr(), 3, 1.5, &mut k),
            FsdgpmStatus::InvalidInput
        );
        assert_eq!(
            fsdgpm_rank_select(ptr::null(), 3, 0.9, &mut k),
            FsdgpmStatus::NullPointer
        );
        assert_eq!(
            fsdgpm_rank_select(sv.as_ptr(), 3, 0.9, ptr::null_mut()),
            FsdgpmStatus::NullPointer
        );
    }
    assert!(last_error().contains("out is null"));
    let v = unsafe { CStr::from_ptr(fsdgpm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn model_round_trip_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let (net, path) = saved_network(dir.path(), &[4, 6, 3], HeadMode::Single);
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(fsdgpm_model_load(path.as_ptr(), 0, &mut model), FsdgpmStatus::Ok);
        assert_eq!(fsdgpm_model_input_dim(model), 4);
        assert_eq!(fsdgpm_model_class_count(model), 3);
        assert_eq!(fsdgpm_model_layer_count(model), 2);
        let mut ranks = [9usize; 2];
        assert_eq!(fsdgpm_model_ranks(model, ranks.as_mut_ptr(), 2), FsdgpmStatus::Ok);
        assert_eq!(ranks, [0, 0]);
        assert_eq!(
            fsdgpm_model_ranks(model, ranks.as_mut_ptr(), 1),
            FsdgpmStatus::InvalidInput
        );
    }

    let x = gaussian_matrix(&mut Rng::new(4), 7, 4);
    let mut predicted = [0usize; 7];
    unsafe {
        let s = fsdgpm_model_predict(model, x.data().as_ptr(), 7, 4, 0, predicted.as_mut_ptr());
        assert_eq!(s, FsdgpmStatus::Ok);
    }
    let batch = Batch::for_task(x.clone(), predicted.to_vec(), 0).unwrap();
    assert_eq!(net.accuracy(&batch, Head::PerSample).unwrap(), 1.0);

    let mut acc = 0.0;
    unsafe {
        let s = fsdgpm_model_accuracy(model, x.data().as_ptr(), predicted.as_ptr(), 7, 4, 0, &mut acc);
        assert_eq!(s, FsdgpmStatus::Ok);
        assert_eq!(acc, 1.0);
        let s = fsdgpm_model_predict(model, x.data().as_ptr(), 7, 5, 0, predicted.as_mut_ptr());
        assert_eq!(s, FsdgpmStatus::InvalidInput);

        let copy = c_path(&dir.path().join("copy.ckpt"));
        assert_eq!(fsdgpm_model_save(model, copy.as_ptr()), FsdgpmStatus::Ok);
        fsdgpm_model_free(model);
    }
    let a = std::fs::read(dir.path().join("net.ckpt")).unwrap();
    let b = std::fs::read(dir.path().join("copy.ckpt")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn multi_head_split() {
    let dir = tempfile::tempdir().unwrap();
    let mode = HeadMode::Multi {
        task_count: 3,
        classes_per_task: 2,
    };
    let (_, path) = saved_network(dir.path(), &[4, 5, 6], mode);
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(fsdgpm_model_load(path.as_ptr(), 3, &mut model), FsdgpmStatus::Ok);
        assert_eq!(fsdgpm_model_class_count(model), 2);
        fsdgpm_model_free(model);
        assert_eq!(
            fsdgpm_model_load(path.as_ptr(), 4, &mut model),
            FsdgpmStatus::InvalidInput
        );
    }
}

#[test]
fn load_errors_carry_status_and_message() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = ptr::null_mut();
    let missing = c_path(&dir.path().join("absent.ckpt"));
    unsafe {
        assert_eq!(fsdgpm_model_load(missing.as_ptr(), 0, &mut model), FsdgpmStatus::Io);
    }
    assert!(last_error().contains("absent.ckpt"));

    let bad = dir.path().join("bad.ckpt");
    std::fs::write(&bad, b"NOTACKPTxxxx").unwrap();
    let bad = c_path(&bad);
    unsafe {
        assert_eq!(fsdgpm_model_load(bad.as_ptr(), 0, &mut model), FsdgpmStatus::Format);
        assert_eq!(fsdgpm_model_load(ptr::null(), 0, &mut model), FsdgpmStatus::NullPointer);
    }
    assert!(model.is_null());
    assert!(last_error().contains("path is null"));
    unsafe { fsdgpm_model_free(ptr::null_mut()) };
}

#[test]
fn trainer_handle_learns_and_snapshots() {
    let method = CString::new("gpm").unwrap();
    let dims = [6usize, 8, 2];
    let mut trainer = ptr::null_mut();
    unsafe {
        let s = fsdgpm_trainer_new(method.as_ptr(), dims.as_ptr(), 3, 0, 1, &mut trainer);
        assert_eq!(s, FsdgpmStatus::Ok);
    }
    let mut rng = Rng::new(8);
    let (rows, cols) = (40, 6);
    let mut x = gaussian_matrix(&mut rng, rows, cols);
    let labels: Vec<usize> = (0..rows).map(|r| r % 2).collect();
    for (r, &y) in labels.iter().enumerate() {
        x.row_mut(r)[0] += if y == 1 { 3.0 } else { -3.0 };
    }
    let mut losses = Vec::new();
    unsafe {
        assert_eq!(fsdgpm_trainer_begin_task(trainer, 0), FsdgpmStatus::Ok);
        for _ in 0..20 {
            let mut loss = 0.0;
            let s = fsdgpm_trainer_train_batch(trainer, x.data().as_ptr(), labels.as_ptr(), rows, cols, &mut loss);
            assert_eq!(s, FsdgpmStatus::Ok);
            losses.push(loss);
        }
        assert_eq!(fsdgpm_trainer_finish_task(trainer), FsdgpmStatus::Ok);
    }
    assert!(losses.last().unwrap() < &losses[0]);

    let mut model = ptr::null_mut();
    let mut acc = 0.0;
    let mut ranks = [0usize; 2];
    unsafe {
        assert_eq!(fsdgpm_trainer_snapshot(trainer, &mut model), FsdgpmStatus::Ok);
        let s = fsdgpm_model_accuracy(model, x.data().as_ptr(), labels.as_ptr(), rows, cols, 0, &mut acc);
        assert_eq!(s, FsdgpmStatus::Ok);
        assert_eq!(fsdgpm_model_ranks(model, ranks.as_mut_ptr(), 2), FsdgpmStatus::Ok);
        fsdgpm_model_free(model);
        fsdgpm_trainer_free(trainer);
    }
    assert!(acc > 0.9, "accuracy {acc}");
    assert!(ranks[0] > 0);

    let unknown = CString::new("sgd").unwrap();
    let status = unsafe { fsdgpm_trainer_new(unknown.as_ptr(), dims.as_ptr(), 3, 0, 1, &mut trainer) };
    assert_eq!(status, FsdgpmStatus::Usage);
    assert!(last_error().contains("unknown method"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fsdgpm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "fsdgpm_model_load",
        "fsdgpm_trainer_train_batch",
        "fsdgpm_bwt",
        "FSDGPM_STATUS_NULL_POINTER",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler available; header syntax not checked");
        return;
    };
    assert!(status.success());
}

#[test]
fn c_program_links_against_staticlib() {
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libfsdgpm_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping C link check", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let Ok(status) = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
    else {
        eprintln!("no C compiler available; skipping C link check");
        return;
    };
    assert!(status.success(), "C smoke program failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
