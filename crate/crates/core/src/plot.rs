//! Static SVG / PNG rendering of length-bin bar charts and probability heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::trainer::csv_err;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Svg,
    Png,
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(ImageFormat::Svg),
            "png" => Ok(ImageFormat::Png),
            other => Err(Error::config(format!("unknown image format {other:?}"))),
        }
    }
}

/// One x-axis group with a value per system.
#[derive(Debug, Clone, PartialEq)]
pub struct BarGroup {
    pub label: String,
    pub base: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LengthBinCsv {
    pub bin: usize,
    pub size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub base_rg1: f64,
    pub base_rg2: f64,
    pub base_rgl: f64,
    pub model_rg1: f64,
    pub model_rg2: f64,
    pub model_rgl: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HeatmapCsv {
    pub position: usize,
    pub section_category: String,
    pub prob: f64,
    pub is_selected: bool,
    pub is_oracle: bool,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

/// Bar groups (mean of the three ROUGE F1s per system) from `length_bins.csv`.
pub fn length_bin_groups(path: &Path) -> Result<Vec<BarGroup>> {
    Ok(read_csv::<LengthBinCsv>(path)?
        .into_iter()
        .map(|r| BarGroup {
            label: format!("{}-{}", r.min_len, r.max_len),
            base: (r.base_rg1 + r.base_rg2 + r.base_rgl) / 3.0,
            model: (r.model_rg1 + r.model_rg2 + r.model_rgl) / 3.0,
        })
        .collect())
}

pub fn heatmap_rows(path: &Path) -> Result<Vec<HeatmapCsv>> {
    read_csv(path)
}

const BASE_COLOR: [u8; 3] = [120, 144, 196];
const MODEL_COLOR: [u8; 3] = [222, 126, 66];

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heat_color(p: f64) -> [u8; 3] {
    let p = p.clamp(0.0, 1.0);
    let fade = |full: u8| (255.0 - (255.0 - full as f64) * p).round() as u8;
    [fade(178), fade(24), fade(43)]
}

const BAR_W: usize = 18;
const GROUP_GAP: usize = 14;
const CHART_H: usize = 200;
const MARGIN: usize = 30;

fn bar_layout(groups: &[BarGroup]) -> (usize, usize, f64) {
    let width = 2 * MARGIN + groups.len() * (2 * BAR_W + GROUP_GAP);
    let height = CHART_H + 2 * MARGIN;
    let max = groups
        .iter()
        .flat_map(|g| [g.base, g.model])
        .fold(0.0f64, f64::max)
        .max(1e-9);
    (width, height, max)
}

pub fn bar_chart_svg(groups: &[BarGroup], title: &str) -> String {
    let (width, height, max) = bar_layout(groups);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="9">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="14" font-size="11">{}</text>"#,
        escape(title)
    );
    let baseline = MARGIN + CHART_H;
    for (i, g) in groups.iter().enumerate() {
        let x0 = MARGIN + i * (2 * BAR_W + GROUP_GAP);
        for (j, (v, color)) in [(g.base, BASE_COLOR), (g.model, MODEL_COLOR)]
            .into_iter()
            .enumerate()
        {
            let h = (v / max * CHART_H as f64).round() as usize;
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{BAR_W}" height="{h}" fill="{}"><title>{v:.4}</title></rect>"#,
                x0 + j * BAR_W,
                baseline - h,
                hex(color)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + BAR_W,
            baseline + 12,
            escape(&g.label)
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="black"/>"#,
        width - MARGIN
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn bar_chart_png(groups: &[BarGroup]) -> RgbImage {
    let (width, height, max) = bar_layout(groups);
    let mut img = RgbImage::from_pixel(width as u32, height as u32, Rgb([255, 255, 255]));
    let baseline = MARGIN + CHART_H;
    for (i, g) in groups.iter().enumerate() {
        let x0 = MARGIN + i * (2 * BAR_W + GROUP_GAP);
        for (j, (v, color)) in [(g.base, BASE_COLOR), (g.model, MODEL_COLOR)]
            .into_iter()
            .enumerate()
        {
            let h = (v / max * CHART_H as f64).round() as usize;
            fill_rect(&mut img, x0 + j * BAR_W, baseline - h, BAR_W, h, color);
        }
    }
    fill_rect(&mut img, MARGIN, baseline, width - 2 * MARGIN, 1, [0, 0, 0]);
    img
}

const CELL: usize = 22;

pub fn heatmap_svg(rows: &[HeatmapCsv], title: &str) -> String {
    let width = 2 * MARGIN + rows.len().max(1) * CELL;
    let height = 2 * MARGIN + CELL + 14;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="8">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="14" font-size="11">{}</text>"#,
        escape(title)
    );
    for (i, r) in rows.iter().enumerate() {
        let x = MARGIN + i * CELL;
        let stroke = if r.is_selected {
            r#" stroke="black" stroke-width="2""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{MARGIN}" width="{CELL}" height="{CELL}" fill="{}"{stroke}><title>{} {} p={:.3}</title></rect>"#,
            hex(heat_color(r.prob)),
            r.position,
            escape(&r.section_category),
            r.prob
        );
        let star = if r.is_oracle { "*" } else { "" };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}{star}</text>"#,
            x + CELL / 2,
            MARGIN + CELL + 10,
            r.position
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn heatmap_png(rows: &[HeatmapCsv]) -> RgbImage {
    let width = 2 * MARGIN + rows.len().max(1) * CELL;
    let height = 2 * MARGIN + CELL;
    let mut img = RgbImage::from_pixel(width as u32, height as u32, Rgb([255, 255, 255]));
    for (i, r) in rows.iter().enumerate() {
        let x = MARGIN + i * CELL;
        if r.is_selected {
            fill_rect(&mut img, x, MARGIN, CELL, CELL, [0, 0, 0]);
            fill_rect(
                &mut img,
                x + 2,
                MARGIN + 2,
                CELL - 4,
                CELL - 4,
                heat_color(r.prob),
            );
        } else {
            fill_rect(&mut img, x, MARGIN, CELL, CELL, heat_color(r.prob));
        }
        if r.is_oracle {
            fill_rect(
                &mut img,
                x + CELL / 2 - 2,
                MARGIN + CELL + 4,
                4,
                4,
                [0, 0, 0],
            );
        }
    }
    img
}

fn fill_rect(img: &mut RgbImage, x: usize, y: usize, w: usize, h: usize, color: [u8; 3]) {
    for yy in y..(y + h).min(img.height() as usize) {
        for xx in x..(x + w).min(img.width() as usize) {
            img.put_pixel(xx as u32, yy as u32, Rgb(color));
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn save_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub fn save_png(path: &Path, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
}
