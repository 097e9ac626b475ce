//! MNIST IDX ingestion and task-stream construction.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::nn::Batch;
use crate::numerics::{derive_seed, dot, Matrix, Rng};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

const PERMUTATION_STREAM: u64 = 0x5045_524d;
const SUBSAMPLE_STREAM: u64 = 0x5355_4253;
const SYNTHETIC_STREAM: u64 = 0x5359_4e54;

/// One task: its training and test rows plus the pixel permutation applied.
#[derive(Clone, Debug)]
pub struct TaskDataset {
    pub task_id: usize,
    pub train: Batch,
    pub test: Batch,
    /// `permuted[j] = original[permutation[j]]`.
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct TaskStream {
    pub tasks: Vec<TaskDataset>,
    pub input_dim: usize,
    pub class_count: usize,
}

impl TaskStream {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::format(path, "gzip", e.to_string()))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path, field: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(path, field, "file truncated in header"))
}

/// Reads an IDX image/label pair. Pixels are scaled to `[0, 1]` and each
/// image is flattened row-major. Task ids are all zero.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Batch> {
    let images = read_maybe_gz(images_path)?;
    let labels = read_maybe_gz(labels_path)?;

    let magic = be_u32(&images, 0, images_path, "magic")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::format(
            images_path,
            "magic",
            format!("expected 0x{IDX_IMAGE_MAGIC:08x}, found 0x{magic:08x}"),
        ));
    }
    let count = be_u32(&images, 4, images_path, "count")? as usize;
    let rows = be_u32(&images, 8, images_path, "rows")? as usize;
    let cols = be_u32(&images, 12, images_path, "cols")? as usize;
    let dim = rows * cols;
    let pixels = &images[16..];
    if pixels.len() < count * dim {
        return Err(Error::format(
            images_path,
            "pixels",
            format!("expected {} bytes, found {}", count * dim, pixels.len()),
        ));
    }

    let magic = be_u32(&labels, 0, labels_path, "magic")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::format(
            labels_path,
            "magic",
            format!("expected 0x{IDX_LABEL_MAGIC:08x}, found 0x{magic:08x}"),
        ));
    }
    let label_count = be_u32(&labels, 4, labels_path, "count")? as usize;
    if label_count != count {
        return Err(Error::format(
            labels_path,
            "count",
            format!("{label_count} labels for {count} images"),
        ));
    }
    let label_bytes = &labels[8..];
    if label_bytes.len() < count {
        return Err(Error::format(
            labels_path,
            "labels",
            format!("expected {count} bytes, found {}", label_bytes.len()),
        ));
    }
    if let Some(bad) = label_bytes[..count].iter().find(|&&b| b > 9) {
        return Err(Error::format(
            labels_path,
            "labels",
            format!("label {bad} outside 0..9"),
        ));
    }

    let data = pixels[..count * dim].iter().map(|&p| p as f64 / 255.0).collect();
    let inputs = Matrix::from_vec(count, dim, data);
    let labels = label_bytes[..count].iter().map(|&b| b as usize).collect();
    Batch::for_task(inputs, labels, 0)
}

/// Locates the standard MNIST file names (optionally gzipped) in `dir`.
pub fn find_mnist(dir: &Path) -> Option<MnistPaths> {
    fn pick(dir: &Path, stem: &str) -> Option<PathBuf> {
        [stem.to_string(), format!("{stem}.gz")]
            .iter()
            .map(|n| dir.join(n))
            .find(|p| p.is_file())
    }
    Some(MnistPaths {
        train_images: pick(dir, "train-images-idx3-ubyte")?,
        train_labels: pick(dir, "train-labels-idx1-ubyte")?,
        test_images: pick(dir, "t10k-images-idx3-ubyte")?,
        test_labels: pick(dir, "t10k-labels-idx1-ubyte")?,
    })
}

#[derive(Clone, Debug)]
pub struct MnistPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistPaths {
    pub fn load(&self) -> Result<(Batch, Batch)> {
        Ok((
            load_idx(&self.train_images, &self.train_labels)?,
            load_idx(&self.test_images, &self.test_labels)?,
        ))
    }
}

/// Applies `permuted[j] = row[permutation[j]]` to every row.
pub fn permute_columns(inputs: &Matrix, permutation: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(inputs.rows(), inputs.cols());
    for r in 0..inputs.rows() {
        let src = inputs.row(r);
        for (dst, &p) in out.row_mut(r).iter_mut().zip(permutation) {
            *dst = src[p];
        }
    }
    out
}

pub fn invert_permutation(permutation: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; permutation.len()];
    for (j, &p) in permutation.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

/// Builds a permuted-pixel task stream. Task 0 keeps the identity
/// permutation; every task draws its own training subsample from `train`
/// and permutes the first `test_per_task` rows of `test`.
pub fn make_permuted_stream(
    train: &Batch,
    test: &Batch,
    task_count: usize,
    train_per_task: usize,
    test_per_task: usize,
    seed: u64,
) -> Result<TaskStream> {
    if train_per_task > train.len() {
        return Err(Error::Capacity {
            what: "training rows per task",
            requested: train_per_task,
            available: train.len(),
        });
    }
    if test_per_task > test.len() {
        return Err(Error::Capacity {
            what: "test rows per task",
            requested: test_per_task,
            available: test.len(),
        });
    }
    if train.input_dim() != test.input_dim() {
        return Err(Error::invalid("train and test input dims differ"));
    }
    let dim = train.input_dim();
    let test_rows: Vec<usize> = (0..test_per_task).collect();
    let test_base = test.select(&test_rows);

    let mut tasks = Vec::with_capacity(task_count);
    for t in 0..task_count {
        let permutation: Vec<usize> = if t == 0 {
            (0..dim).collect()
        } else {
            Rng::new(derive_seed(seed, PERMUTATION_STREAM + t as u64)).permutation(dim)
        };
        let mut sub_rng = Rng::new(derive_seed(seed, SUBSAMPLE_STREAM + t as u64));
        let rows = sub_rng.sample_indices(train.len(), train_per_task);
        let picked = train.select(&rows);
        let train_t = Batch::for_task(permute_columns(&picked.inputs, &permutation), picked.labels, t)?;
        let test_t = Batch::for_task(
            permute_columns(&test_base.inputs, &permutation),
            test_base.labels.clone(),
            t,
        )?;
        tasks.push(TaskDataset {
            task_id: t,
            train: train_t,
            test: test_t,
            permutation: Some(permutation),
        });
    }
    Ok(TaskStream {
        tasks,
        input_dim: dim,
        class_count: 10,
    })
}

/// Distance of each class mean from the origin, in units of the cluster σ.
const SYNTHETIC_MEAN_SCALE: f64 = 5.0;

/// Gaussian-cluster tasks. Class `c` of task `t` is centred at
/// `scale · Q_t e_c` with unit isotropic noise, where `Q_t` is a seeded
/// random rotation per task. Train and test each hold `samples_per_task`
/// rows with labels balanced to within one.
pub fn make_synthetic_stream(
    task_count: usize,
    dims: usize,
    classes: usize,
    samples_per_task: usize,
    seed: u64,
) -> Result<TaskStream> {
    if dims < classes || classes == 0 {
        return Err(Error::invalid(format!(
            "synthetic stream needs dims ({dims}) >= classes ({classes}) > 0"
        )));
    }
    let mut tasks = Vec::with_capacity(task_count);
    for t in 0..task_count {
        let mut rng = Rng::new(derive_seed(seed, SYNTHETIC_STREAM + t as u64));
        let means = random_orthonormal_columns(&mut rng, dims, classes);
        let train = sample_clusters(&mut rng, &means, samples_per_task, t)?;
        let test = sample_clusters(&mut rng, &means, samples_per_task, t)?;
        tasks.push(TaskDataset {
            task_id: t,
            train,
            test,
            permutation: None,
        });
    }
    Ok(TaskStream {
        tasks,
        input_dim: dims,
        class_count: classes,
    })
}

/// `count` orthonormal vectors in `R^dims` (Gram-Schmidt on Gaussian draws).
fn random_orthonormal_columns(rng: &mut Rng, dims: usize, count: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dims).map(|_| rng.normal()).collect();
        for b in &basis {
            let p = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

fn sample_clusters(rng: &mut Rng, means: &[Vec<f64>], n: usize, task: usize) -> Result<Batch> {
    let dims = means[0].len();
    let classes = means.len();
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    rng.shuffle(&mut labels);
    let mut data = Vec::with_capacity(n * dims);
    for &y in &labels {
        for &m in &means[y] {
            data.push(SYNTHETIC_MEAN_SCALE * m + rng.normal());
        }
    }
    Batch::for_task(Matrix::from_vec(n, dims, data), labels, task)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Head, HeadMode, Network};
    use std::io::Write;

    fn idx_images(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
        out.extend_from_slice(&count.to_be_bytes());
        out.extend_from_slice(&rows.to_be_bytes());
        out.extend_from_slice(&cols.to_be_bytes());
        out.extend_from_slice(pixels);
        out
    }

    fn idx_labels(magic: u32, labels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&magic.to_be_bytes());
        out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        out.extend_from_slice(labels);
        out
    }

    fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, bytes).unwrap();
        p
    }

    #[test]
    fn loads_plain_and_gzipped_idx() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..2 * 784).map(|i| (i % 256) as u8).collect();
        let img = idx_images(2, 28, 28, &pixels);
        let lab = idx_labels(IDX_LABEL_MAGIC, &[3, 9]);
        let ip = write(dir.path(), "i", &img);
        let lp = write(dir.path(), "l", &lab);
        let batch = load_idx(&ip, &lp).unwrap();
        assert_eq!(batch.inputs.shape(), (2, 784));
        assert_eq!(batch.labels, vec![3, 9]);
        assert_eq!(batch.inputs.get(0, 255), 1.0);
        assert_eq!(batch.inputs.get(0, 0), 0.0);

        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(&img).unwrap();
        let gp = write(dir.path(), "i.gz", &gz.finish().unwrap());
        assert_eq!(load_idx(&gp, &lp).unwrap(), batch);
    }

    #[test]
    fn header_declares_sixty_thousand_rows() {
        let header = idx_images(60000, 28, 28, &[]);
        assert_eq!(&header[..4], &[0, 0, 8, 3]);
        let dir = tempfile::tempdir().unwrap();
        let ip = write(dir.path(), "i", &header);
        let lp = write(dir.path(), "l", &idx_labels(IDX_LABEL_MAGIC, &[0]));
        // header promises 60000×784 pixels that are not there
        match load_idx(&ip, &lp) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "pixels"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_label_magic_and_count_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ip = write(dir.path(), "i", &idx_images(1, 28, 28, &[0; 784]));
        let lp = write(dir.path(), "l", &idx_labels(0x0000_0802, &[1]));
        match load_idx(&ip, &lp) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "magic"),
            other => panic!("unexpected {other:?}"),
        }
        let lp = write(dir.path(), "l2", &idx_labels(IDX_LABEL_MAGIC, &[1, 2]));
        match load_idx(&ip, &lp) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "count"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn fake_pool(n: usize, rng: &mut Rng) -> Batch {
        let data = (0..n * 784).map(|_| rng.uniform()).collect();
        let labels = (0..n).map(|i| i % 10).collect();
        Batch::for_task(Matrix::from_vec(n, 784, data), labels, 0).unwrap()
    }

    #[test]
    fn permuted_stream_properties() {
        let mut rng = Rng::new(1);
        let train = fake_pool(300, &mut rng);
        let test = fake_pool(50, &mut rng);
        let s1 = make_permuted_stream(&train, &test, 4, 100, 50, 42).unwrap();
        let s2 = make_permuted_stream(&train, &test, 4, 100, 50, 42).unwrap();
        assert_eq!(s1.tasks[0].test.inputs, test.inputs);
        for (a, b) in s1.tasks.iter().zip(&s2.tasks) {
            assert_eq!(a.train, b.train);
            assert_eq!(a.test, b.test);
        }
        for task in &s1.tasks {
            let p = task.permutation.as_ref().unwrap();
            let mut sorted = p.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..784).collect::<Vec<_>>());
            let restored = permute_columns(&task.test.inputs, &invert_permutation(p));
            assert_eq!(restored, test.inputs);
            assert!(task.train.inputs.data().iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(task.train.task_ids.iter().all(|&t| t == task.task_id));
        }
        assert_ne!(s1.tasks[1].permutation, s1.tasks[2].permutation);
        assert!(matches!(
            make_permuted_stream(&train, &test, 2, 301, 10, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn subsampled_rows_are_unique() {
        let mut rng = Rng::new(2);
        let rows = rng.sample_indices(60000, 1000);
        let mut sorted = rows.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 1000);
    }

    #[test]
    fn synthetic_stream_is_deterministic_and_balanced() {
        let a = make_synthetic_stream(3, 12, 4, 101, 9).unwrap();
        let b = make_synthetic_stream(3, 12, 4, 101, 9).unwrap();
        for (x, y) in a.tasks.iter().zip(&b.tasks) {
            assert_eq!(x.train, y.train);
        }
        for task in &a.tasks {
            let mut counts = [0usize; 4];
            task.train.labels.iter().for_each(|&y| counts[y] += 1);
            let (min, max) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(max - min <= 1);
        }
        assert!(make_synthetic_stream(1, 3, 4, 10, 0).is_err());
    }

    #[test]
    fn synthetic_task_is_linearly_learnable() {
        let stream = make_synthetic_stream(1, 20, 5, 500, 3).unwrap();
        let data = &stream.tasks[0].train;
        let mut rng = Rng::new(4);
        let mut net = Network::new(&[20, 5], HeadMode::Single, &mut rng).unwrap();
        for _ in 0..30 {
            for start in (0..data.len()).step_by(10) {
                let rows: Vec<usize> = (start..start + 10).collect();
                let (_, g) = net.loss_and_grads(&data.select(&rows), None, Head::Task(0)).unwrap();
                net.sgd_step(&g, 0.05).unwrap();
            }
        }
        let acc = net.dataset_accuracy(data, Head::Task(0)).unwrap();
        assert!(acc >= 0.95, "train accuracy {acc}");
    }
}
