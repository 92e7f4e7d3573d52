//! Keyframe gate: patch → pool → flatten → single sigmoid unit.
//!
//! A frame is a keyframe when the score reaches the threshold; equality counts
//! as a keyframe so borderline frames still reach the cost map.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::costmap::SemanticMap;
use crate::labels::MAX_LABEL;
use crate::pgm::{GrayImage, PgmError};
use crate::nn::{binary_cross_entropy, flatten_features, patchify, Activation, DenseLayer, Image, NnError};

const MAGIC: &[u8; 4] = b"KFM1";

#[derive(Debug, Error)]
pub enum KeyframeError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set contains only {0:?} examples; both classes are required")]
    SingleClass(bool),
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("weights file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: PgmError,
    },
    #[error("{path}:{line}: {message}")]
    Labels { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyframeDecision {
    pub score: f64,
    pub is_keyframe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyframeModel {
    patch_size: usize,
    dense: DenseLayer,
    threshold: f64,
}

impl KeyframeModel {
    pub fn new(patch_size: usize, weights: Vec<f64>, bias: f64, threshold: f64) -> Result<Self, KeyframeError> {
        if patch_size == 0 {
            return Err(NnError::Shape("patch size must be positive".into()).into());
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(KeyframeError::Threshold(threshold));
        }
        let dense = DenseLayer::new(weights.len(), weights, vec![bias], Activation::Sigmoid)?;
        Ok(Self {
            patch_size,
            dense,
            threshold,
        })
    }

    /// All-zero weights: every frame scores exactly 0.5.
    pub fn zeros(patch_size: usize, input_len: usize, threshold: f64) -> Result<Self, KeyframeError> {
        Self::new(patch_size, vec![0.0; input_len], 0.0, threshold)
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn input_len(&self) -> usize {
        self.dense.inputs()
    }

    pub fn weights(&self) -> &[f64] {
        self.dense.weights()
    }

    pub fn bias(&self) -> f64 {
        self.dense.bias()[0]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn dense(&self) -> &DenseLayer {
        &self.dense
    }

    /// Pooled patch features fed to the dense layer.
    pub fn features(&self, img: &Image) -> Result<Vec<f64>, NnError> {
        let f = flatten_features(&patchify(img, self.patch_size)?);
        if f.len() != self.input_len() {
            return Err(NnError::Shape(format!(
                "image yields {} features, model expects {}",
                f.len(),
                self.input_len()
            )));
        }
        Ok(f)
    }

    pub fn score(&self, img: &Image) -> Result<f64, NnError> {
        Ok(self.dense.forward(&self.features(img)?)?[0])
    }

    pub fn decide(&self, img: &Image) -> Result<KeyframeDecision, NnError> {
        let score = self.score(img)?;
        Ok(KeyframeDecision {
            score,
            is_keyframe: score >= self.threshold,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * (self.input_len() + 2));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.patch_size as u32).to_le_bytes());
        out.extend_from_slice(&(self.input_len() as u32).to_le_bytes());
        for w in self.weights() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend_from_slice(&self.bias().to_le_bytes());
        out.extend_from_slice(&self.threshold.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyframeError> {
        let fmt = |m: &str| KeyframeError::Format(m.to_string());
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(fmt("missing KFM1 magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let patch_size = u32_at(4);
        let input_len = u32_at(8);
        let expected = 12 + 8 * (input_len + 2);
        if bytes.len() != expected {
            return Err(KeyframeError::Format(format!(
                "expected {expected} bytes for {input_len} weights, found {}",
                bytes.len()
            )));
        }
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let weights = (0..input_len).map(|i| f64_at(12 + 8 * i)).collect();
        let bias = f64_at(12 + 8 * input_len);
        let threshold = f64_at(20 + 8 * input_len);
        Self::new(patch_size, weights, bias, threshold)
    }

    pub fn save(&self, path: &Path) -> Result<(), KeyframeError> {
        fs::write(path, self.to_bytes()).map_err(|source| KeyframeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, KeyframeError> {
        let bytes = fs::read(path).map_err(|source| KeyframeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

/// Free-function form of [`KeyframeModel::decide`].
pub fn keyframe_decide(img: &Image, model: &KeyframeModel) -> Result<KeyframeDecision, NnError> {
    model.decide(img)
}

/// Grayscale view of a label patch, each cell scaled to `label / 22`.
pub fn image_from_labels(patch: &SemanticMap) -> Image {
    let data = patch
        .labels()
        .iter()
        .map(|&l| l as f64 / MAX_LABEL as f64)
        .collect();
    Image::gray(patch.height(), patch.width(), data).expect("semantic maps are non-empty")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub patch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            patch_size: 4,
            epochs: 500,
            learning_rate: 0.5,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: KeyframeModel,
    /// Accuracy of the returned model on the training set.
    pub accuracy: f64,
    /// Mean cross-entropy before each epoch, plus the final value.
    pub loss_history: Vec<f64>,
}

/// Full-batch gradient descent on binary cross-entropy. Only the dense layer
/// learns; the pooled features are fixed, so they are computed once.
pub fn train_keyframe(dataset: &[(Image, bool)], cfg: &TrainConfig) -> Result<TrainOutcome, KeyframeError> {
    let first = dataset.first().ok_or(KeyframeError::EmptyDataset)?;
    if dataset.iter().all(|(_, y)| *y == first.1) {
        return Err(KeyframeError::SingleClass(first.1));
    }
    let features = dataset
        .iter()
        .map(|(img, _)| Ok(flatten_features(&patchify(img, cfg.patch_size)?)))
        .collect::<Result<Vec<_>, NnError>>()?;
    let input_len = features[0].len();
    if let Some(f) = features.iter().find(|f| f.len() != input_len) {
        return Err(NnError::Shape(format!(
            "training images disagree in shape ({} vs {input_len} features)",
            f.len()
        ))
        .into());
    }
    let targets: Vec<bool> = dataset.iter().map(|(_, y)| *y).collect();

    let mut model = KeyframeModel::zeros(cfg.patch_size, input_len, cfg.threshold)?;
    let n = dataset.len() as f64;
    let predict = |m: &KeyframeModel| -> Vec<f64> {
        features
            .iter()
            .map(|x| m.dense.forward(x).expect("shape checked")[0])
            .collect()
    };

    let mut loss_history = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        let probs = predict(&model);
        loss_history.push(binary_cross_entropy(&probs, &targets));
        let mut grad_w = vec![0.0; input_len];
        let mut grad_b = 0.0;
        for ((x, p), &y) in features.iter().zip(&probs).zip(&targets) {
            let err = p - if y { 1.0 } else { 0.0 };
            grad_b += err;
            for (g, xi) in grad_w.iter_mut().zip(x) {
                *g += err * xi;
            }
        }
        let (w, b) = model.dense.params_mut();
        for (wi, g) in w.iter_mut().zip(&grad_w) {
            *wi -= cfg.learning_rate * g / n;
        }
        b[0] -= cfg.learning_rate * grad_b / n;
    }
    let probs = predict(&model);
    loss_history.push(binary_cross_entropy(&probs, &targets));
    let correct = probs
        .iter()
        .zip(&targets)
        .filter(|(&p, &y)| (p >= cfg.threshold) == y)
        .count();
    log::info!(
        "keyframe training: {} epochs, final loss {:.6}",
        cfg.epochs,
        loss_history.last().unwrap()
    );
    Ok(TrainOutcome {
        model,
        accuracy: correct as f64 / n,
        loss_history,
    })
}

/// Classification summary on a labelled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub total: usize,
    pub accuracy: f64,
    /// Fraction of "Yes" frames classified as keyframes; `None` without any.
    pub tpr_yes: Option<f64>,
    /// Fraction of "No" frames rejected; `None` without any.
    pub tpr_no: Option<f64>,
}

pub fn evaluate(model: &KeyframeModel, dataset: &[(Image, bool)]) -> Result<EvalReport, KeyframeError> {
    if dataset.is_empty() {
        return Err(KeyframeError::EmptyDataset);
    }
    let (mut correct, mut yes, mut yes_hit, mut no, mut no_hit) = (0, 0, 0, 0, 0);
    for (img, label) in dataset {
        let predicted = model.decide(img)?.is_keyframe;
        if predicted == *label {
            correct += 1;
        }
        if *label {
            yes += 1;
            yes_hit += predicted as usize;
        } else {
            no += 1;
            no_hit += (!predicted) as usize;
        }
    }
    let ratio = |hit: usize, total: usize| (total > 0).then(|| hit as f64 / total as f64);
    Ok(EvalReport {
        total: dataset.len(),
        accuracy: correct as f64 / dataset.len() as f64,
        tpr_yes: ratio(yes_hit, yes),
        tpr_no: ratio(no_hit, no),
    })
}

/// Separable toy data: "Yes" frames are bright (pixels in `[0.45, 1]`), "No"
/// frames dark (pixels in `[0, 0.55]`). Yes frames come first.
pub fn synthetic_dataset(n_yes: usize, n_no: usize, side: usize, seed: u64) -> Vec<(Image, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make = |lo: f64, hi: f64| {
        let data = (0..side * side).map(|_| rng.gen_range(lo..=hi)).collect();
        Image::gray(side, side, data).expect("side > 0")
    };
    let mut out = Vec::with_capacity(n_yes + n_no);
    for _ in 0..n_yes {
        out.push((make(0.45, 1.0), true));
    }
    for _ in 0..n_no {
        out.push((make(0.0, 0.55), false));
    }
    out
}

fn image_err(path: PathBuf, e: PgmError) -> KeyframeError {
    match e {
        // Already names the file.
        PgmError::Io { path, source } => KeyframeError::Io { path, source },
        source => KeyframeError::Image { path, source },
    }
}

/// Name of the index file in a dataset directory.
pub const LABELS_FILE: &str = "labels.txt";

/// One labelled frame of an on-disk dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub file: String,
    pub image: Image,
    pub keyframe: bool,
}

/// Read `<dir>/labels.txt` (`<file> Yes|No` per line, `#` comments) and the
/// grayscale PGM images it lists, scaled to `[0, 1]`.
pub fn load_dataset(dir: &Path) -> Result<Vec<Sample>, KeyframeError> {
    let index = dir.join(LABELS_FILE);
    let text = fs::read_to_string(&index).map_err(|source| KeyframeError::Io {
        path: index.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| KeyframeError::Labels {
            path: index.clone(),
            line: i + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let (Some(file), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(format!("expected `<file> Yes|No`, got {line:?}")));
        };
        let keyframe = match label.to_ascii_lowercase().as_str() {
            "yes" => true,
            "no" => false,
            _ => return Err(bad(format!("label must be Yes or No, got {label:?}"))),
        };
        let path = dir.join(file);
        let img = GrayImage::read(&path).map_err(|e| image_err(path, e))?;
        let scale = img.maxval as f64;
        let data = img.pixels.iter().map(|&p| p as f64 / scale).collect();
        let image = Image::gray(img.height, img.width, data)?;
        out.push(Sample {
            file: file.to_string(),
            image,
            keyframe,
        });
    }
    if out.is_empty() {
        return Err(KeyframeError::EmptyDataset);
    }
    Ok(out)
}

/// Write frames as 8-bit PGMs named `frame_0000.pgm`, … plus `labels.txt`.
pub fn save_dataset(dir: &Path, data: &[(Image, bool)]) -> Result<(), KeyframeError> {
    let io = |path: PathBuf| move |source| KeyframeError::Io { path, source };
    fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let mut index = String::new();
    for (i, (img, label)) in data.iter().enumerate() {
        if img.channels() != 1 {
            return Err(NnError::Shape(format!("frame {i} has {} channels; PGM frames are grayscale", img.channels())).into());
        }
        let file = format!("frame_{i:04}.pgm");
        let pixels = img
            .data()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let pgm = GrayImage {
            width: img.width(),
            height: img.height(),
            maxval: 255,
            pixels,
        };
        let path = dir.join(&file);
        pgm.write(&path).map_err(|e| image_err(path, e))?;
        index.push_str(&format!("{file} {}\n", if *label { "Yes" } else { "No" }));
    }
    let path = dir.join(LABELS_FILE);
    fs::write(&path, index).map_err(io(path.clone()))
}
