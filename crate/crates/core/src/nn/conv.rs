use super::{gap, shape_err, Image, NnError};

/// Square convolution kernel, weights laid out `[out][in][ky][kx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    size: usize,
    in_channels: usize,
    out_channels: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl ConvKernel {
    pub fn new(
        size: usize,
        in_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, NnError> {
        if size != 1 && size != 3 {
            return Err(NnError::KernelSize(size));
        }
        let out_channels = bias.len();
        if in_channels == 0 || out_channels == 0 {
            return shape_err("convolution needs at least one input and one output channel");
        }
        let expected = out_channels * in_channels * size * size;
        if weights.len() != expected {
            return shape_err(format!("{size}x{size} kernel needs {expected} weights, got {}", weights.len()));
        }
        Ok(Self {
            size,
            in_channels,
            out_channels,
            weights,
            bias,
        })
    }

    pub fn zeros(size: usize, in_channels: usize, out_channels: usize) -> Result<Self, NnError> {
        Self::new(
            size,
            in_channels,
            vec![0.0; out_channels * in_channels * size * size],
            vec![0.0; out_channels],
        )
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    #[inline]
    fn weight(&self, out: usize, inp: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((out * self.in_channels + inp) * self.size + ky) * self.size + kx]
    }
}

/// Stride-1 cross-correlation with zero padding; output keeps the spatial shape.
pub fn conv2d(fmap: &Image, kernel: &ConvKernel) -> Result<Image, NnError> {
    if fmap.channels() != kernel.in_channels {
        return shape_err(format!(
            "feature map has {} channels, kernel expects {}",
            fmap.channels(),
            kernel.in_channels
        ));
    }
    let (h, w) = (fmap.height() as isize, fmap.width() as isize);
    let half = (kernel.size / 2) as isize;
    let mut out = Vec::with_capacity(fmap.height() * fmap.width() * kernel.out_channels);
    for r in 0..h {
        for c in 0..w {
            for o in 0..kernel.out_channels {
                let mut acc = kernel.bias[o];
                for ky in 0..kernel.size {
                    let rr = r + ky as isize - half;
                    if rr < 0 || rr >= h {
                        continue;
                    }
                    for kx in 0..kernel.size {
                        let cc = c + kx as isize - half;
                        if cc < 0 || cc >= w {
                            continue;
                        }
                        let px = fmap.pixel(rr as usize, cc as usize);
                        for (i, v) in px.iter().enumerate() {
                            acc += kernel.weight(o, i, ky, kx) * v;
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Image::new(fmap.height(), fmap.width(), kernel.out_channels, out)
}

/// Parameters of the channel-attention refinement block.
///
/// `context` acts on the pooled channel vector (a 1×1 convolution applied to a
/// 1×1 map is exactly a `C × C` linear map); `spatial` is the 3×3 branch.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    context: ConvKernel,
    spatial: ConvKernel,
}

impl AttentionParams {
    pub fn new(context: ConvKernel, spatial: ConvKernel) -> Result<Self, NnError> {
        let c = context.in_channels;
        if context.size != 1 || spatial.size != 3 {
            return shape_err("attention needs a 1x1 context kernel and a 3x3 spatial kernel");
        }
        if context.out_channels != c || spatial.in_channels != c || spatial.out_channels != c {
            return shape_err("attention kernels must map C channels to C channels");
        }
        Ok(Self { context, spatial })
    }

    pub fn zeros(channels: usize) -> Result<Self, NnError> {
        Self::new(ConvKernel::zeros(1, channels, channels)?, ConvKernel::zeros(3, channels, channels)?)
    }

    pub fn channels(&self) -> usize {
        self.context.in_channels
    }

    pub fn context(&self) -> &ConvKernel {
        &self.context
    }

    pub fn spatial(&self) -> &ConvKernel {
        &self.spatial
    }
}

/// `f + conv3x3(f) ⊙ conv1x1(mean(f))`, the pooled context broadcast over every pixel.
pub fn attention_refine(fmap: &Image, params: &AttentionParams) -> Result<Image, NnError> {
    if fmap.channels() != params.channels() {
        return shape_err(format!(
            "feature map has {} channels, attention expects {}",
            fmap.channels(),
            params.channels()
        ));
    }
    let pooled = Image::new(1, 1, fmap.channels(), gap(fmap))?;
    let context = conv2d(&pooled, &params.context)?.into_data();
    let emphasized = conv2d(fmap, &params.spatial)?;
    let c = fmap.channels();
    let data = fmap
        .data()
        .iter()
        .zip(emphasized.data())
        .enumerate()
        .map(|(k, (f, e))| f + e * context[k % c])
        .collect();
    Image::new(fmap.height(), fmap.width(), c, data)
}
