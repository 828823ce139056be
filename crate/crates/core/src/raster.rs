//! Pixel containers: RGBA images, binary/soft masks and CHW feature maps.
//!
//! Images are interleaved RGBA f32 in [0, 1]. Sampling follows the pixel-
//! center convention: the center of pixel (i, j) sits at continuous
//! coordinates (i + 0.5, j + 0.5). Feature maps are channel-major (CHW), the
//! layout the modulation and loss code iterate over.

/// Interleaved RGBA image, f32 per channel in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RasterImage {
    /// Transparent black canvas.
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height * 4] }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height * 4, "raw buffer must be width*height*4");
        Self { width, height, data }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 4]) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.set_pixel(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 4] {
        let i = (y * self.width + x) * 4;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgba: [f32; 4]) {
        let i = (y * self.width + x) * 4;
        self.data[i..i + 4].copy_from_slice(&rgba);
    }

    /// Bilinear sample at continuous coordinates; out-of-bounds taps read as
    /// transparent black. Pixel centers sit at (i + 0.5, j + 0.5), so
    /// sampling exactly at a center returns that pixel.
    pub fn bilinear(&self, x: f64, y: f64) -> [f32; 4] {
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let dx = (fx - x0) as f32;
        let dy = (fy - y0) as f32;
        let (x0, y0) = (x0 as i64, y0 as i64);

        let tap = |tx: i64, ty: i64| -> [f32; 4] {
            if tx < 0 || ty < 0 || tx >= self.width as i64 || ty >= self.height as i64 {
                [0.0; 4]
            } else {
                self.pixel(tx as usize, ty as usize)
            }
        };
        let (p00, p10, p01, p11) = (tap(x0, y0), tap(x0 + 1, y0), tap(x0, y0 + 1), tap(x0 + 1, y0 + 1));
        let mut out = [0.0f32; 4];
        for c in 0..4 {
            let top = p00[c] * (1.0 - dx) + p10[c] * dx;
            let bottom = p01[c] * (1.0 - dx) + p11[c] * dx;
            out[c] = top * (1.0 - dy) + bottom * dy;
        }
        out
    }
}

/// Per-pixel boolean mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.set(x, y, f(x, y));
            }
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    fn assert_same_size(&self, other: &BinaryMask, op: &str) {
        assert!(
            self.width == other.width && self.height == other.height,
            "mask {op} needs equal sizes, got {}x{} vs {}x{}",
            self.width,
            self.height,
            other.width,
            other.height
        );
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.assert_same_size(other, "union");
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &BinaryMask) -> BinaryMask {
        self.assert_same_size(other, "intersection");
        self.zip_with(other, |a, b| a & b)
    }

    /// Pixels set in `self` but not in `other`.
    pub fn and_not(&self, other: &BinaryMask) -> BinaryMask {
        self.assert_same_size(other, "difference");
        self.zip_with(other, |a, b| a & !b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        let data = self.data.iter().zip(other.data.iter()).map(|(&a, &b)| f(a, b)).collect();
        BinaryMask { width: self.width, height: self.height, data }
    }

    /// Intersection over union; 1.0 when both masks are empty.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        self.assert_same_size(other, "IoU");
        let mut inter = 0usize;
        let mut uni = 0usize;
        for (&a, &b) in self.data.iter().zip(other.data.iter()) {
            inter += (a & b) as usize;
            uni += (a | b) as usize;
        }
        if uni == 0 {
            1.0
        } else {
            inter as f64 / uni as f64
        }
    }

    /// Chebyshev (L∞) erosion: a pixel survives iff the whole
    /// (2r+1)×(2r+1) window around it is inside the mask and the frame.
    pub fn erode(&self, radius: usize) -> BinaryMask {
        let r = radius as i64;
        BinaryMask::from_fn(self.width, self.height, |x, y| {
            for dy in -r..=r {
                for dx in -r..=r {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
                        return false;
                    }
                    if !self.get(nx as usize, ny as usize) {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// Integer shift; pixels moved outside the frame are dropped, vacated
    /// pixels are false.
    pub fn translated(&self, dx: i64, dy: i64) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| {
            let (sx, sy) = (x as i64 - dx, y as i64 - dy);
            sx >= 0
                && sy >= 0
                && sx < self.width as i64
                && sy < self.height as i64
                && self.get(sx as usize, sy as usize)
        })
    }
}

/// Per-pixel coverage in [0, 1], e.g. a warped alpha channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl SoftMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    pub fn from_alpha(image: &RasterImage) -> Self {
        let data = image.data().chunks_exact(4).map(|px| px[3]).collect();
        Self { width: image.width(), height: image.height(), data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        self.data[y * self.width + x] = value;
    }

    /// True where coverage strictly exceeds the threshold.
    pub fn binarize(&self, threshold: f32) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v > threshold).collect(),
        }
    }
}

/// Channel-major (CHW) f32 feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width, data: vec![0.0; channels * height * width] }
    }

    pub fn from_raw(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), channels * height * width, "raw buffer must be C*H*W");
        Self { channels, height, width, data }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut map = Self::new(channels, height, width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    map.set(c, y, x, f(c, y, x));
                }
            }
        }
        map
    }

    /// (channels, height, width)
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f32) {
        self.data[(c * self.height + y) * self.width + x] = value;
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let plane = self.height * self.width;
        &mut self.data[c * plane..(c + 1) * plane]
    }
}
