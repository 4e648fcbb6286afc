//! 8-bit grayscale raster buffer and the image operations the distortion
//! pipeline is built from.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image. 255 is paper white, 0 is full ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![fill; (width as usize) * (height as usize)],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y as usize) * (self.width as usize) + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[(y as usize) * (self.width as usize) + x as usize] = value;
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), self.width, self.height);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_error(path))?;
        writer
            .write_image_data(&self.pixels)
            .map_err(png_error(path))?;
        Ok(())
    }

    pub fn load_png(path: &Path) -> Result<GrayImage> {
        let decoder = png::Decoder::new(BufReader::new(File::open(path)?));
        let mut reader = decoder.read_info().map_err(png_decode_error(path))?;
        let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
        let info = reader
            .next_frame(&mut buf)
            .map_err(png_decode_error(path))?;
        if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                detail: format!(
                    "expected 8-bit grayscale PNG, got {:?}/{:?}",
                    info.color_type, info.bit_depth
                ),
            });
        }
        buf.truncate(info.buffer_size());
        Ok(GrayImage {
            width: info.width,
            height: info.height,
            pixels: buf,
        })
    }
}

fn png_error(path: &Path) -> impl Fn(png::EncodingError) -> Error + '_ {
    move |e| Error::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    }
}

fn png_decode_error(path: &Path) -> impl Fn(png::DecodingError) -> Error + '_ {
    move |e| Error::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    }
}

/// Separable Gaussian blur with kernel radius `ceil(3 * sigma)` and
/// clamp-to-edge boundaries. A sigma of zero is a no-op.
pub(crate) fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for w in kernel.iter_mut() {
        *w /= sum;
    }

    let (w, h) = (img.width as i64, img.height as i64);
    let mut horizontal = vec![0f32; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (k, weight) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - radius).clamp(0, w - 1);
                acc += weight * img.pixels[(y * w + sx) as usize] as f64;
            }
            horizontal[(y * w + x) as usize] = acc as f32;
        }
    }
    let mut out = GrayImage::new(img.width, img.height, 0);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (k, weight) in kernel.iter().enumerate() {
                let sy = (y + k as i64 - radius).clamp(0, h - 1);
                acc += weight * horizontal[(sy * w + x) as usize] as f64;
            }
            out.pixels[(y * w + x) as usize] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Rotate by `skew_deg` then shear horizontally by `shear_deg`, both about
/// the image center, in one bilinear resampling pass. The output canvas is
/// the bounding box of the transformed input, so no content is clipped at
/// any angle; uncovered border pixels take `fill`.
pub(crate) fn affine_skew_shear(
    img: &GrayImage,
    skew_deg: f64,
    shear_deg: f64,
    fill: u8,
) -> GrayImage {
    if skew_deg == 0.0 && shear_deg == 0.0 {
        return img.clone();
    }
    let rot = skew_deg.to_radians();
    let shear = shear_deg.to_radians().tan();
    let (cos, sin) = (rot.cos(), rot.sin());
    // M = Shear * Rotation, in raster coordinates (y down).
    let m11 = cos + shear * sin;
    let m12 = -sin + shear * cos;
    let m21 = sin;
    let m22 = cos;

    let (w, h) = (img.width as f64, img.height as f64);
    let (cx, cy) = (w / 2.0, h / 2.0);
    let corners = [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)];
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (x, y) in corners {
        let (dx, dy) = (x - cx, y - cy);
        let tx = m11 * dx + m12 * dy;
        let ty = m21 * dx + m22 * dy;
        min_x = min_x.min(tx);
        max_x = max_x.max(tx);
        min_y = min_y.min(ty);
        max_y = max_y.max(ty);
    }
    let out_w = (max_x - min_x).ceil() as u32 + 1;
    let out_h = (max_y - min_y).ceil() as u32 + 1;

    // det(Shear * Rotation) = 1, so the inverse is the adjugate.
    let (i11, i12, i21, i22) = (m22, -m12, -m21, m11);

    let mut out = GrayImage::new(out_w, out_h, fill);
    for oy in 0..out_h {
        for ox in 0..out_w {
            let tx = ox as f64 + 0.5 + min_x;
            let ty = oy as f64 + 0.5 + min_y;
            let sx = i11 * tx + i12 * ty + cx;
            let sy = i21 * tx + i22 * ty + cy;
            out.set(ox, oy, bilinear_sample(img, sx - 0.5, sy - 0.5, fill));
        }
    }
    out
}

/// Bilinear sample at pixel coordinates (0,0 = center of the top-left
/// pixel); out-of-range neighbors contribute `fill`.
#[inline]
fn bilinear_sample(img: &GrayImage, x: f64, y: f64, fill: u8) -> u8 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let fetch = |ix: i64, iy: i64| -> f64 {
        if ix < 0 || iy < 0 || ix >= img.width as i64 || iy >= img.height as i64 {
            fill as f64
        } else {
            img.get(ix as u32, iy as u32) as f64
        }
    };
    let (x0, y0) = (x0 as i64, y0 as i64);
    let v = fetch(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + fetch(x0 + 1, y0) * fx * (1.0 - fy)
        + fetch(x0, y0 + 1) * (1.0 - fx) * fy
        + fetch(x0 + 1, y0 + 1) * fx * fy;
    v.round().clamp(0.0, 255.0) as u8
}

/// Separable morphological min filter over a square window; with dark ink
/// on light paper this thickens strokes.
pub(crate) fn min_filter(img: &GrayImage, radius: u32) -> GrayImage {
    window_filter(img, radius, u8::min)
}

/// Separable morphological max filter; thins dark strokes.
pub(crate) fn max_filter(img: &GrayImage, radius: u32) -> GrayImage {
    window_filter(img, radius, u8::max)
}

fn window_filter(img: &GrayImage, radius: u32, reduce: fn(u8, u8) -> u8) -> GrayImage {
    let r = radius as i64;
    let (w, h) = (img.width as i64, img.height as i64);
    let mut horizontal = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = img.pixels[(y * w + x.max(0)) as usize];
            for dx in -r..=r {
                let sx = (x + dx).clamp(0, w - 1);
                acc = reduce(acc, img.pixels[(y * w + sx) as usize]);
            }
            horizontal.pixels[(y * w + x) as usize] = acc;
        }
    }
    let mut out = horizontal.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = horizontal.pixels[(y * w + x) as usize];
            for dy in -r..=r {
                let sy = (y + dy).clamp(0, h - 1);
                acc = reduce(acc, horizontal.pixels[(sy * w + x) as usize]);
            }
            out.pixels[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Bilinear resize to an exact target size.
pub(crate) fn resize_bilinear(img: &GrayImage, new_w: u32, new_h: u32) -> GrayImage {
    if new_w == img.width && new_h == img.height {
        return img.clone();
    }
    let sx = img.width as f64 / new_w as f64;
    let sy = img.height as f64 / new_h as f64;
    let mut out = GrayImage::new(new_w, new_h, 0);
    for y in 0..new_h {
        for x in 0..new_w {
            let u = (x as f64 + 0.5) * sx - 0.5;
            let v = (y as f64 + 0.5) * sy - 0.5;
            // Clamp into range so edges replicate instead of bleeding fill.
            let u = u.clamp(0.0, img.width as f64 - 1.0);
            let v = v.clamp(0.0, img.height as f64 - 1.0);
            out.set(x, y, bilinear_sample(img, u, v, 0));
        }
    }
    out
}

/// Add a uniform margin on all four sides.
pub(crate) fn pad_margins(img: &GrayImage, margin: u32, fill: u8) -> GrayImage {
    if margin == 0 {
        return img.clone();
    }
    let mut out = GrayImage::new(img.width + 2 * margin, img.height + 2 * margin, fill);
    for y in 0..img.height {
        for x in 0..img.width {
            out.set(x + margin, y + margin, img.get(x, y));
        }
    }
    out
}

/// Force the image to an exact width: right-pad short images with `fill`,
/// center-crop long ones.
pub(crate) fn fit_width(img: &GrayImage, target_w: u32, fill: u8) -> GrayImage {
    use std::cmp::Ordering;
    match img.width.cmp(&target_w) {
        Ordering::Equal => img.clone(),
        Ordering::Less => {
            let mut out = GrayImage::new(target_w, img.height, fill);
            for y in 0..img.height {
                for x in 0..img.width {
                    out.set(x, y, img.get(x, y));
                }
            }
            out
        }
        Ordering::Greater => {
            let offset = (img.width - target_w) / 2;
            let mut out = GrayImage::new(target_w, img.height, fill);
            for y in 0..img.height {
                for x in 0..target_w {
                    out.set(x, y, img.get(x + offset, y));
                }
            }
            out
        }
    }
}
