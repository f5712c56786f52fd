//! Synthetic video generators: bouncing balls and bouncing digit sprites.
//!
//! Both worlds live in the unit square with reflecting walls and render to
//! square frames. Ball frames are grayscale in [0, 1] with anti-aliased
//! disc edges; sprite frames are binary, produced by splatting an 8x8 glyph
//! at a subpixel position and thresholding.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::data::Dataset;
use crate::exec::Executor;
use crate::math;
use crate::rng::{derive_rng, tag};
use crate::{Error, Result};

/// Settings for the bouncing-ball world.
#[derive(Debug, Clone)]
pub struct BallWorldConfig {
    pub n_sequences: usize,
    pub steps: usize,
    pub frame_px: u32,
    pub n_balls: usize,
    /// Ball radius in world units (the frame spans [0, 1]).
    pub radius: f64,
    /// Constant speed of every ball, in world units per step.
    pub speed: f64,
    pub seed: u64,
}

impl Default for BallWorldConfig {
    fn default() -> Self {
        BallWorldConfig {
            n_sequences: 100,
            steps: 40,
            frame_px: 32,
            n_balls: 1,
            radius: 0.12,
            speed: 0.05,
            seed: 0,
        }
    }
}

/// Settings for the bouncing digit-sprite world.
#[derive(Debug, Clone)]
pub struct SpriteWorldConfig {
    pub n_sequences: usize,
    pub steps: usize,
    pub frame_px: u32,
    pub n_sprites: usize,
    /// Digit glyphs (0 through 9) to draw sprites from.
    pub glyphs: Vec<u8>,
    /// Constant speed of every sprite, in world units per step.
    pub speed: f64,
    /// Pixel values at or above this become 1 after splatting.
    pub binarize_threshold: f64,
    pub seed: u64,
}

impl Default for SpriteWorldConfig {
    fn default() -> Self {
        SpriteWorldConfig {
            n_sequences: 100,
            steps: 20,
            frame_px: 64,
            n_sprites: 1,
            glyphs: (0..10).collect(),
            speed: 0.05,
            binarize_threshold: 0.1,
            seed: 0,
        }
    }
}

/// 8x8 bitmaps for the digits 0 through 9; bit 7 of each row byte is the
/// leftmost pixel.
pub const DIGIT_GLYPHS: [[u8; 8]; 10] = [
    [0x3C, 0x66, 0x6E, 0x76, 0x66, 0x66, 0x3C, 0x00],
    [0x18, 0x38, 0x18, 0x18, 0x18, 0x18, 0x7E, 0x00],
    [0x3C, 0x66, 0x06, 0x1C, 0x30, 0x66, 0x7E, 0x00],
    [0x3C, 0x66, 0x06, 0x1C, 0x06, 0x66, 0x3C, 0x00],
    [0x0C, 0x1C, 0x3C, 0x6C, 0x7E, 0x0C, 0x0C, 0x00],
    [0x7E, 0x60, 0x7C, 0x06, 0x06, 0x66, 0x3C, 0x00],
    [0x1C, 0x30, 0x60, 0x7C, 0x66, 0x66, 0x3C, 0x00],
    [0x7E, 0x66, 0x06, 0x0C, 0x18, 0x18, 0x18, 0x00],
    [0x3C, 0x66, 0x66, 0x3C, 0x66, 0x66, 0x3C, 0x00],
    [0x3C, 0x66, 0x66, 0x3E, 0x06, 0x0C, 0x38, 0x00],
];

#[derive(Debug, Clone, Copy)]
struct Body {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

/// Reflect a coordinate into [lo, hi], flipping its velocity once per fold.
pub fn reflect(pos: &mut f64, vel: &mut f64, lo: f64, hi: f64) {
    loop {
        if *pos < lo {
            *pos = 2.0 * lo - *pos;
            *vel = -*vel;
        } else if *pos > hi {
            *pos = 2.0 * hi - *pos;
            *vel = -*vel;
        } else {
            return;
        }
    }
}

fn random_direction<R: Rng>(rng: &mut R, speed: f64) -> (f64, f64) {
    let angle = rng.gen::<f64>() * 2.0 * core::f64::consts::PI;
    (speed * math::cos(angle), speed * math::sin(angle))
}

/// Generate bouncing-ball sequences. Balls move at constant speed, reflect
/// off the walls, and collide elastically with each other; the speed of each
/// ball is restored after every collision so the world never slows down.
pub fn simulate_balls<E: Executor>(cfg: &BallWorldConfig, exec: &E) -> Result<Dataset> {
    if cfg.n_sequences == 0 || cfg.steps == 0 {
        return Err(Error::EmptyInput {
            what: "ball world shape",
        });
    }
    if cfg.n_balls == 0 {
        return Err(Error::EmptyInput { what: "balls" });
    }
    if cfg.frame_px == 0 {
        return Err(Error::InvalidConfig {
            what: "frame size",
            detail: alloc::format!("{} pixels", cfg.frame_px),
        });
    }
    if !(cfg.radius > 0.0 && cfg.radius < 0.5) {
        return Err(Error::InvalidConfig {
            what: "ball radius",
            detail: alloc::format!("{} outside (0, 0.5)", cfg.radius),
        });
    }
    if !(cfg.speed.is_finite() && cfg.speed >= 0.0) {
        return Err(Error::InvalidConfig {
            what: "ball speed",
            detail: alloc::format!("{}", cfg.speed),
        });
    }
    let frame_len = (cfg.frame_px * cfg.frame_px) as usize;
    let sequences: Vec<Result<Vec<f32>>> = exec.map_indexed(cfg.n_sequences, |n| {
        let mut rng = derive_rng(cfg.seed, &[tag::SIM, n as u64]);
        let mut balls = place_balls(cfg, &mut rng)?;
        let mut pixels = Vec::with_capacity(cfg.steps * frame_len);
        for _ in 0..cfg.steps {
            let mut frame = vec![0.0f32; frame_len];
            for ball in &balls {
                render_disc(&mut frame, cfg.frame_px, ball.x, ball.y, cfg.radius);
            }
            pixels.extend_from_slice(&frame);
            advance_balls(&mut balls, cfg);
        }
        Ok(pixels)
    });
    let mut all = Vec::with_capacity(cfg.n_sequences * cfg.steps * frame_len);
    for seq in sequences {
        all.extend_from_slice(&seq?);
    }
    Dataset::from_pixels(cfg.frame_px, cfg.steps as u32, all)
}

/// Place balls uniformly with no initial overlap, rejecting and redrawing a
/// position up to 1000 times per ball.
fn place_balls<R: Rng>(cfg: &BallWorldConfig, rng: &mut R) -> Result<Vec<Body>> {
    let lo = cfg.radius;
    let hi = 1.0 - cfg.radius;
    let mut balls: Vec<Body> = Vec::with_capacity(cfg.n_balls);
    for ball in 0..cfg.n_balls {
        let mut attempts = 0usize;
        let (x, y) = loop {
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::Placement { ball, attempts: attempts - 1 });
            }
            let x = lo + rng.gen::<f64>() * (hi - lo);
            let y = lo + rng.gen::<f64>() * (hi - lo);
            let clear = balls
                .iter()
                .all(|b| math::hypot(b.x - x, b.y - y) >= 2.0 * cfg.radius);
            if clear {
                break (x, y);
            }
        };
        let (vx, vy) = random_direction(rng, cfg.speed);
        balls.push(Body { x, y, vx, vy });
    }
    Ok(balls)
}

fn advance_balls(balls: &mut [Body], cfg: &BallWorldConfig) {
    let lo = cfg.radius;
    let hi = 1.0 - cfg.radius;
    for b in balls.iter_mut() {
        b.x += b.vx;
        b.y += b.vy;
        reflect(&mut b.x, &mut b.vx, lo, hi);
        reflect(&mut b.y, &mut b.vy, lo, hi);
    }
    for _ in 0..4 {
        let mut any_hit = false;
        for i in 0..balls.len() {
            for j in (i + 1)..balls.len() {
                if collide_pair(balls, i, j, cfg) {
                    any_hit = true;
                }
            }
        }
        if !any_hit {
            return;
        }
    }
}

/// Elastic equal-mass collision: exchange the velocity components along the
/// center line, then rescale each ball back to the configured speed and push
/// the pair apart to touching distance.
fn collide_pair(balls: &mut [Body], i: usize, j: usize, cfg: &BallWorldConfig) -> bool {
    let dx = balls[j].x - balls[i].x;
    let dy = balls[j].y - balls[i].y;
    let dist = math::hypot(dx, dy);
    if dist >= 2.0 * cfg.radius {
        return false;
    }
    let (nx, ny) = if dist > 1e-12 {
        (dx / dist, dy / dist)
    } else {
        (1.0, 0.0)
    };
    let ai = balls[i].vx * nx + balls[i].vy * ny;
    let aj = balls[j].vx * nx + balls[j].vy * ny;
    if ai - aj <= 0.0 {
        return false;
    }
    balls[i].vx += (aj - ai) * nx;
    balls[i].vy += (aj - ai) * ny;
    balls[j].vx += (ai - aj) * nx;
    balls[j].vy += (ai - aj) * ny;
    rescale_speed(&mut balls[i], -nx, -ny, cfg.speed);
    rescale_speed(&mut balls[j], nx, ny, cfg.speed);
    let overlap = 2.0 * cfg.radius - dist;
    let lo = cfg.radius;
    let hi = 1.0 - cfg.radius;
    balls[i].x = (balls[i].x - nx * overlap / 2.0).clamp(lo, hi);
    balls[i].y = (balls[i].y - ny * overlap / 2.0).clamp(lo, hi);
    balls[j].x = (balls[j].x + nx * overlap / 2.0).clamp(lo, hi);
    balls[j].y = (balls[j].y + ny * overlap / 2.0).clamp(lo, hi);
    true
}

fn rescale_speed(b: &mut Body, fx: f64, fy: f64, speed: f64) {
    let mag = math::hypot(b.vx, b.vy);
    if mag > 1e-12 {
        b.vx *= speed / mag;
        b.vy *= speed / mag;
    } else {
        b.vx = fx * speed;
        b.vy = fy * speed;
    }
}

/// Draw an anti-aliased disc at world position (cx, cy) by max-compositing
/// per-pixel coverage: full inside the radius, fading linearly to zero over
/// one pixel width at the rim.
fn render_disc(frame: &mut [f32], frame_px: u32, cx: f64, cy: f64, radius: f64) {
    let p = frame_px as f64;
    let pw = 1.0 / p;
    let x_min = (math::floor((cx - radius) * p) as i64 - 1).max(0) as u32;
    let x_max = (math::floor((cx + radius) * p) as i64 + 2).min(frame_px as i64) as u32;
    let y_min = (math::floor((cy - radius) * p) as i64 - 1).max(0) as u32;
    let y_max = (math::floor((cy + radius) * p) as i64 + 2).min(frame_px as i64) as u32;
    for py in y_min..y_max {
        let wy = (py as f64 + 0.5) * pw;
        for px in x_min..x_max {
            let wx = (px as f64 + 0.5) * pw;
            let d = math::hypot(wx - cx, wy - cy);
            let coverage = ((radius - d) * p).clamp(0.0, 1.0) as f32;
            let idx = (py * frame_px + px) as usize;
            if coverage > frame[idx] {
                frame[idx] = coverage;
            }
        }
    }
}

/// Generate bouncing digit-sprite sequences with binary frames.
pub fn simulate_sprites<E: Executor>(cfg: &SpriteWorldConfig, exec: &E) -> Result<Dataset> {
    if cfg.n_sequences == 0 || cfg.steps == 0 {
        return Err(Error::EmptyInput {
            what: "sprite world shape",
        });
    }
    if cfg.n_sprites == 0 {
        return Err(Error::EmptyInput { what: "sprites" });
    }
    if cfg.glyphs.is_empty() {
        return Err(Error::EmptyInput { what: "glyphs" });
    }
    if let Some(&g) = cfg.glyphs.iter().find(|&&g| g >= 10) {
        return Err(Error::InvalidConfig {
            what: "glyph",
            detail: alloc::format!("digit {g} outside 0..=9"),
        });
    }
    if cfg.frame_px < 8 {
        return Err(Error::InvalidConfig {
            what: "frame size",
            detail: alloc::format!("{} pixels is too small for an 8x8 glyph", cfg.frame_px),
        });
    }
    if !(cfg.binarize_threshold > 0.0 && cfg.binarize_threshold < 1.0) {
        return Err(Error::InvalidConfig {
            what: "binarize threshold",
            detail: alloc::format!("{} outside (0, 1)", cfg.binarize_threshold),
        });
    }
    if !(cfg.speed.is_finite() && cfg.speed >= 0.0) {
        return Err(Error::InvalidConfig {
            what: "sprite speed",
            detail: alloc::format!("{}", cfg.speed),
        });
    }
    let frame_len = (cfg.frame_px * cfg.frame_px) as usize;
    let half = 4.0 / cfg.frame_px as f64;
    let sequences: Vec<Vec<f32>> = exec.map_indexed(cfg.n_sequences, |n| {
        let mut rng = derive_rng(cfg.seed, &[tag::SIM, n as u64]);
        let mut sprites: Vec<(u8, Body)> = (0..cfg.n_sprites)
            .map(|_| {
                let glyph = cfg.glyphs[rng.gen_range(0..cfg.glyphs.len())];
                let x = half + rng.gen::<f64>() * (1.0 - 2.0 * half);
                let y = half + rng.gen::<f64>() * (1.0 - 2.0 * half);
                let (vx, vy) = random_direction(&mut rng, cfg.speed);
                (glyph, Body { x, y, vx, vy })
            })
            .collect();
        let mut pixels = Vec::with_capacity(cfg.steps * frame_len);
        for _ in 0..cfg.steps {
            let mut frame = vec![0.0f32; frame_len];
            for (glyph, body) in &sprites {
                splat_glyph(&mut frame, cfg.frame_px, *glyph, body.x, body.y);
            }
            for v in frame.iter_mut() {
                *v = if *v as f64 >= cfg.binarize_threshold { 1.0 } else { 0.0 };
            }
            pixels.extend_from_slice(&frame);
            for (_, body) in sprites.iter_mut() {
                body.x += body.vx;
                body.y += body.vy;
                reflect(&mut body.x, &mut body.vx, half, 1.0 - half);
                reflect(&mut body.y, &mut body.vy, half, 1.0 - half);
            }
        }
        pixels
    });
    let mut all = Vec::with_capacity(cfg.n_sequences * cfg.steps * frame_len);
    for seq in sequences {
        all.extend_from_slice(&seq);
    }
    Dataset::from_pixels(cfg.frame_px, cfg.steps as u32, all)
}

/// Splat one glyph centered at world position (cx, cy): each set glyph bit
/// lands at a subpixel position and spreads its weight over the four
/// neighboring pixels bilinearly, max-composited into the frame.
fn splat_glyph(frame: &mut [f32], frame_px: u32, glyph: u8, cx: f64, cy: f64) {
    let p = frame_px as f64;
    let rows = &DIGIT_GLYPHS[glyph as usize];
    let fx = cx * p - 4.0;
    let fy = cy * p - 4.0;
    for (gy, row) in rows.iter().enumerate() {
        for gx in 0..8u32 {
            if row & (0x80 >> gx) == 0 {
                continue;
            }
            let px = fx + gx as f64;
            let py = fy + gy as f64;
            let x0 = math::floor(px);
            let y0 = math::floor(py);
            let tx = px - x0;
            let ty = py - y0;
            let parts = [
                (x0 as i64, y0 as i64, (1.0 - tx) * (1.0 - ty)),
                (x0 as i64 + 1, y0 as i64, tx * (1.0 - ty)),
                (x0 as i64, y0 as i64 + 1, (1.0 - tx) * ty),
                (x0 as i64 + 1, y0 as i64 + 1, tx * ty),
            ];
            for (ix, iy, w) in parts {
                if ix < 0 || iy < 0 || ix >= frame_px as i64 || iy >= frame_px as i64 {
                    continue;
                }
                let idx = (iy as u32 * frame_px + ix as u32) as usize;
                let w = w as f32;
                if w > frame[idx] {
                    frame[idx] = w;
                }
            }
        }
    }
}
