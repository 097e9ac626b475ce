//! C ABI over the `fsdgpm` engine.
//!
//! Every fallible call returns an [`FsdgpmStatus`]; on failure the message is
//! available from [`fsdgpm_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function.
//!
//! Matrices cross the boundary as row-major `double` arrays. Head mode is given
//! as a head count: `0` or `1` for a single shared head, `n >= 2` for `n`
//! equal output blocks.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use fsdgpm::checkpoint::Checkpoint;
use fsdgpm::metrics::AccuracyMatrix;
use fsdgpm::nn::{argmax, Batch, Head, HeadMode, Network};
use fsdgpm::numerics::Matrix;
use fsdgpm::subspace::{rank_select, SubspaceMemory};
use fsdgpm::trainers::{Method, Trainer, TrainerConfig};
use fsdgpm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsdgpmStatus {
    Ok = 0,
    InvalidInput = 1,
    Numeric = 2,
    Format = 3,
    Capacity = 4,
    State = 5,
    UndefinedMetric = 6,
    Usage = 7,
    Io = 8,
    NullPointer = 9,
    Panic = 10,
}

/// Trained weights plus their projection memory.
pub struct FsdgpmModel {
    net: Network,
    memory: SubspaceMemory,
}

/// A seeded continual-learning run driven batch by batch.
pub struct FsdgpmTrainer {
    trainer: Trainer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: FsdgpmStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) => FsdgpmStatus::InvalidInput,
            Error::Numeric(_) => FsdgpmStatus::Numeric,
            Error::Format { .. } | Error::Json(_) => FsdgpmStatus::Format,
            Error::Capacity { .. } => FsdgpmStatus::Capacity,
            Error::State(_) => FsdgpmStatus::State,
            Error::UndefinedMetric(_) => FsdgpmStatus::UndefinedMetric,
            Error::Usage(_) => FsdgpmStatus::Usage,
            Error::Io { .. } => FsdgpmStatus::Io,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn fail(status: FsdgpmStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FsdgpmStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FsdgpmStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FsdgpmStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(FsdgpmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(FsdgpmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(FsdgpmStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn array_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(FsdgpmStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(FsdgpmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FsdgpmStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn head_mode(heads: usize, output_dim: usize) -> Result<HeadMode, Failure> {
    if heads <= 1 {
        return Ok(HeadMode::Single);
    }
    if output_dim % heads != 0 {
        return Err(fail(
            FsdgpmStatus::InvalidInput,
            format!("{output_dim} outputs cannot be split into {heads} heads"),
        ));
    }
    Ok(HeadMode::Multi {
        task_count: heads,
        classes_per_task: output_dim / heads,
    })
}

unsafe fn input_matrix(inputs: *const f64, rows: usize, cols: usize) -> Result<Matrix, Failure> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| fail(FsdgpmStatus::InvalidInput, "rows * cols overflows"))?;
    Ok(Matrix::from_vec(rows, cols, array(inputs, len, "inputs")?.to_vec()))
}

fn head_for(net: &Network, task: usize) -> Head {
    match net.head_mode() {
        HeadMode::Single => Head::PerSample,
        HeadMode::Multi { .. } => Head::Task(task),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsdgpm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn fsdgpm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a checkpoint file into a new model handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_load(
    path: *const c_char,
    heads: usize,
    out: *mut *mut FsdgpmModel,
) -> FsdgpmStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let path = string(path, "path")?;
        let ck = Checkpoint::read(Path::new(path))?;
        let single = ck.network(HeadMode::Single)?;
        let net = ck.network(head_mode(heads, single.output_dim())?)?;
        *out = Box::into_raw(Box::new(FsdgpmModel { net, memory: ck.memory }));
        Ok(())
    })
}

/// Writes `model` to `path` in the checkpoint format.
///
/// # Safety
/// `model` must come from this library and `path` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_save(model: *const FsdgpmModel, path: *const c_char) -> FsdgpmStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let path = string(path, "path")?;
        Checkpoint::from_parts(&model.net, &model.memory).write(Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_free(model: *mut FsdgpmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Input width of the network, 0 for a null handle.
///
/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_input_dim(model: *const FsdgpmModel) -> usize {
    model.as_ref().map_or(0, |m| m.net.input_dim())
}

/// Classes per head, 0 for a null handle.
///
/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_class_count(model: *const FsdgpmModel) -> usize {
    model.as_ref().map_or(0, |m| m.net.head_classes())
}

/// Number of weight layers, 0 for a null handle.
///
/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_layer_count(model: *const FsdgpmModel) -> usize {
    model.as_ref().map_or(0, |m| m.net.layer_count())
}

/// Copies the stored basis rank of each layer into `out[0..len]`.
///
/// # Safety
/// `out` must hold `len` writable elements, `len` at least the layer count.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_ranks(model: *const FsdgpmModel, out: *mut usize, len: usize) -> FsdgpmStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let ranks = model.memory.ranks();
        if len < ranks.len() {
            return Err(fail(
                FsdgpmStatus::InvalidInput,
                format!("need room for {} ranks, got {len}", ranks.len()),
            ));
        }
        array_mut(out, len, "out")?[..ranks.len()].copy_from_slice(&ranks);
        Ok(())
    })
}

/// Argmax class of each of `rows` inputs under the head of `task`.
///
/// # Safety
/// `inputs` must hold `rows * cols` values and `out_labels` `rows` slots.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_predict(
    model: *const FsdgpmModel,
    inputs: *const f64,
    rows: usize,
    cols: usize,
    task: usize,
    out_labels: *mut usize,
) -> FsdgpmStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let x = input_matrix(inputs, rows, cols)?;
        let out = array_mut(out_labels, rows, "out_labels")?;
        let batch = Batch::for_task(x, vec![0; rows], task)?;
        let (logits, _) = model.net.forward(&batch, None, head_for(&model.net, task))?;
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = argmax(logits.row(r));
        }
        Ok(())
    })
}

/// Fraction of `rows` inputs classified as `labels` under the head of `task`.
///
/// # Safety
/// `inputs` must hold `rows * cols` values, `labels` `rows` values.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_model_accuracy(
    model: *const FsdgpmModel,
    inputs: *const f64,
    labels: *const usize,
    rows: usize,
    cols: usize,
    task: usize,
    out: *mut f64,
) -> FsdgpmStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let out = non_null_mut(out, "out")?;
        let x = input_matrix(inputs, rows, cols)?;
        let batch = Batch::for_task(x, array(labels, rows, "labels")?.to_vec(), task)?;
        *out = model.net.dataset_accuracy(&batch, head_for(&model.net, task))?;
        Ok(())
    })
}

/// Starts a run of `method` (for example `"fsdgpm"`) with its permuted-MNIST
/// settings on a network with layer widths `dims[0..n_dims]`.
///
/// # Safety
/// `method` must be NUL-terminated, `dims` hold `n_dims` values, `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_new(
    method: *const c_char,
    dims: *const usize,
    n_dims: usize,
    heads: usize,
    seed: u64,
    out: *mut *mut FsdgpmTrainer,
) -> FsdgpmStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let method: Method = string(method, "method")?.parse()?;
        let dims = array(dims, n_dims, "dims")?;
        let output = *dims
            .last()
            .ok_or_else(|| fail(FsdgpmStatus::InvalidInput, "dims is empty"))?;
        let cfg = TrainerConfig::pmnist(method).with_seed(seed);
        let trainer = Trainer::new(cfg, dims, head_mode(heads, output)?)?;
        *out = Box::into_raw(Box::new(FsdgpmTrainer { trainer }));
        Ok(())
    })
}

/// # Safety
/// `trainer` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_free(trainer: *mut FsdgpmTrainer) {
    if !trainer.is_null() {
        drop(Box::from_raw(trainer));
    }
}

/// Marks the start of task `task`; batches are labelled with it.
///
/// # Safety
/// `trainer` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_begin_task(trainer: *mut FsdgpmTrainer, task: usize) -> FsdgpmStatus {
    guard(|| {
        non_null_mut(trainer, "trainer")?.trainer.begin_task(task);
        Ok(())
    })
}

/// One training batch of the current task; writes its mean loss to `out_loss`
/// when that pointer is non-null.
///
/// # Safety
/// `inputs` must hold `rows * cols` values and `labels` `rows` values.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_train_batch(
    trainer: *mut FsdgpmTrainer,
    inputs: *const f64,
    labels: *const usize,
    rows: usize,
    cols: usize,
    out_loss: *mut f64,
) -> FsdgpmStatus {
    guard(|| {
        let t = &mut non_null_mut(trainer, "trainer")?.trainer;
        let x = input_matrix(inputs, rows, cols)?;
        let batch = Batch::for_task(x, array(labels, rows, "labels")?.to_vec(), t.current_task())?;
        let loss = t.train_batch(&batch)?;
        if let Some(slot) = out_loss.as_mut() {
            *slot = loss;
        }
        Ok(())
    })
}

/// Closes the current task, updating the projection memory where the method keeps one.
///
/// # Safety
/// `trainer` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_finish_task(trainer: *mut FsdgpmTrainer) -> FsdgpmStatus {
    guard(|| {
        non_null_mut(trainer, "trainer")?.trainer.finish_task()?;
        Ok(())
    })
}

/// Copies the trainer's current weights and memory into a new model handle.
///
/// # Safety
/// `trainer` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_trainer_snapshot(
    trainer: *const FsdgpmTrainer,
    out: *mut *mut FsdgpmModel,
) -> FsdgpmStatus {
    guard(|| {
        let t = &non_null(trainer, "trainer")?.trainer;
        let out = non_null_mut(out, "out")?;
        *out = Box::into_raw(Box::new(FsdgpmModel {
            net: t.network().clone(),
            memory: t.memory().clone(),
        }));
        Ok(())
    })
}

unsafe fn accuracy_matrix(r: *const f64, tasks: usize) -> Result<AccuracyMatrix, Failure> {
    let len = tasks
        .checked_mul(tasks)
        .ok_or_else(|| fail(FsdgpmStatus::InvalidInput, "tasks * tasks overflows"))?;
    let values = array(r, len, "r")?;
    let mut m = AccuracyMatrix::new(tasks);
    for i in 0..tasks {
        for j in 0..tasks {
            let v = values[i * tasks + j];
            if !v.is_nan() {
                m.set(i, j, v)?;
            }
        }
    }
    Ok(m)
}

/// Final average accuracy of a row-major `tasks × tasks` matrix. `NaN`
/// marks entries that were never measured.
///
/// # Safety
/// `r` must hold `tasks * tasks` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_acc(r: *const f64, tasks: usize, out: *mut f64) -> FsdgpmStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = accuracy_matrix(r, tasks)?.acc()?;
        Ok(())
    })
}

/// Backward transfer of a row-major `tasks × tasks` matrix; needs `tasks >= 2`.
///
/// # Safety
/// `r` must hold `tasks * tasks` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_bwt(r: *const f64, tasks: usize, out: *mut f64) -> FsdgpmStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = accuracy_matrix(r, tasks)?.bwt()?;
        Ok(())
    })
}

/// Smallest number of leading singular values holding `epsilon` of the energy.
///
/// # Safety
/// `singular_values` must hold `n` values in descending order and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsdgpm_rank_select(
    singular_values: *const f64,
    n: usize,
    epsilon: f64,
    out: *mut usize,
) -> FsdgpmStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        *out = rank_select(array(singular_values, n, "singular_values")?, epsilon)?;
        Ok(())
    })
}
