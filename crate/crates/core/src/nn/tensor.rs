use super::{shape_err, NnError};

/// Row-major `H × W × C` buffer (channel innermost).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self, NnError> {
        if height == 0 || width == 0 || channels == 0 {
            return shape_err(format!("empty image {height}x{width}x{channels}"));
        }
        if data.len() != height * width * channels {
            return shape_err(format!(
                "{height}x{width}x{channels} image needs {} values, got {}",
                height * width * channels,
                data.len()
            ));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Single-channel image.
    pub fn gray(height: usize, width: usize, data: Vec<f64>) -> Result<Self, NnError> {
        Self::new(height, width, 1, data)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self, NnError> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.offset(row, col, ch)]
    }

    /// Channel vector at one pixel.
    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let o = self.offset(row, col, 0);
        &self.data[o..o + self.channels]
    }
}

/// Non-overlapping `P × P` tiles of an image, stored row-major over the tile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    patch_size: usize,
    rows: usize,
    cols: usize,
    patches: Vec<Image>,
}

impl PatchGrid {
    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn patches(&self) -> &[Image] {
        &self.patches
    }

    /// Tile at grid row `i`, column `j` (zero-based).
    pub fn patch(&self, i: usize, j: usize) -> &Image {
        &self.patches[i * self.cols + j]
    }

    /// Stitch the tiles back into the image they came from.
    pub fn reassemble(&self) -> Image {
        let p = self.patch_size;
        let channels = self.patches[0].channels();
        let (h, w) = (self.rows * p, self.cols * p);
        let mut data = vec![0.0; h * w * channels];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let tile = self.patch(i, j);
                for u in 0..p {
                    let dst = ((i * p + u) * w + j * p) * channels;
                    let src = tile.offset(u, 0, 0);
                    data[dst..dst + p * channels].copy_from_slice(&tile.data()[src..src + p * channels]);
                }
            }
        }
        Image::new(h, w, channels, data).expect("tiles share one shape")
    }
}

/// Split an image into `P × P` tiles. No padding: `P` must divide both sides.
pub fn patchify(img: &Image, patch_size: usize) -> Result<PatchGrid, NnError> {
    let p = patch_size;
    if p == 0 || img.height() % p != 0 || img.width() % p != 0 {
        return shape_err(format!(
            "patch size {p} does not divide image {}x{}",
            img.height(),
            img.width()
        ));
    }
    let (rows, cols, c) = (img.height() / p, img.width() / p, img.channels());
    let mut patches = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut data = Vec::with_capacity(p * p * c);
            for u in 0..p {
                let start = img.offset(i * p + u, j * p, 0);
                data.extend_from_slice(&img.data()[start..start + p * c]);
            }
            patches.push(Image::new(p, p, c, data)?);
        }
    }
    Ok(PatchGrid {
        patch_size: p,
        rows,
        cols,
        patches,
    })
}

/// Global average pool: spatial mean of each channel.
pub fn gap(patch: &Image) -> Vec<f64> {
    let c = patch.channels();
    let mut sums = vec![0.0; c];
    for px in patch.data().chunks_exact(c) {
        for (s, v) in sums.iter_mut().zip(px) {
            *s += v;
        }
    }
    let n = (patch.height() * patch.width()) as f64;
    sums.iter_mut().for_each(|s| *s /= n);
    sums
}

/// Concatenate the pooled tiles, row-major over the grid with channels
/// innermost. Length is `rows × cols × channels`.
pub fn flatten_features(grid: &PatchGrid) -> Vec<f64> {
    grid.patches().iter().flat_map(gap).collect()
}
