//! sRGB color values and the CSS color syntax subset used by the style resolver.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Fully opaque sRGB color, one byte per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb { r: 0, g: 0, b: 0 };
    pub const WHITE: Rgb = Rgb {
        r: 255,
        g: 255,
        b: 255,
    };

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    /// Parse a `#rgb`, `#rrggbb`, or `#rrggbbaa` hex string, dropping alpha.
    pub fn from_hex(s: &str) -> Option<Rgb> {
        Rgba::parse_hex(s).map(|c| c.over(Rgb::WHITE))
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl From<Rgb> for String {
    fn from(c: Rgb) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Rgb {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Rgb::from_hex(&s).ok_or_else(|| format!("invalid color {s:?}"))
    }
}

/// Color with alpha, as specified in a stylesheet before compositing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    /// 0.0 = fully transparent, 1.0 = opaque.
    pub a: f32,
}

impl Rgba {
    pub const TRANSPARENT: Rgba = Rgba {
        r: 0,
        g: 0,
        b: 0,
        a: 0.0,
    };

    pub fn opaque(r: u8, g: u8, b: u8) -> Rgba {
        Rgba { r, g, b, a: 1.0 }
    }

    pub fn is_opaque(&self) -> bool {
        self.a >= 1.0
    }

    /// Composite this color over an opaque backdrop.
    pub fn over(self, under: Rgb) -> Rgb {
        if self.is_opaque() {
            return Rgb::new(self.r, self.g, self.b);
        }
        let a = self.a.clamp(0.0, 1.0) as f64;
        let blend = |fg: u8, bg: u8| -> u8 {
            let v = a * fg as f64 + (1.0 - a) * bg as f64;
            v.round().clamp(0.0, 255.0) as u8
        };
        Rgb::new(
            blend(self.r, under.r),
            blend(self.g, under.g),
            blend(self.b, under.b),
        )
    }

    /// Parse the CSS color subset: hex, `rgb()`/`rgba()`, and common keywords.
    /// Returns None for anything unrecognized; callers treat that as
    /// "declaration not understood" and fall back to inheritance.
    pub fn parse(value: &str) -> Option<Rgba> {
        let v = value.trim();
        if v.is_empty() {
            return None;
        }
        if v.starts_with('#') {
            return Self::parse_hex(v);
        }
        let lower = v.to_ascii_lowercase();
        if let Some(args) = lower
            .strip_prefix("rgba")
            .or_else(|| lower.strip_prefix("rgb"))
        {
            return Self::parse_rgb_args(args);
        }
        Self::named(&lower)
    }

    fn parse_hex(s: &str) -> Option<Rgba> {
        let hex = s.strip_prefix('#')?;
        let digit = |c: u8| (c as char).to_digit(16).map(|d| d as u8);
        let bytes = hex.as_bytes();
        match bytes.len() {
            3 | 4 => {
                let mut ch = [0u8; 4];
                for (i, &b) in bytes.iter().enumerate() {
                    let d = digit(b)?;
                    ch[i] = d * 16 + d;
                }
                let a = if bytes.len() == 4 {
                    ch[3] as f32 / 255.0
                } else {
                    1.0
                };
                Some(Rgba {
                    r: ch[0],
                    g: ch[1],
                    b: ch[2],
                    a,
                })
            }
            6 | 8 => {
                let mut ch = [0u8; 4];
                for i in 0..bytes.len() / 2 {
                    ch[i] = digit(bytes[2 * i])? * 16 + digit(bytes[2 * i + 1])?;
                }
                let a = if bytes.len() == 8 {
                    ch[3] as f32 / 255.0
                } else {
                    1.0
                };
                Some(Rgba {
                    r: ch[0],
                    g: ch[1],
                    b: ch[2],
                    a,
                })
            }
            _ => None,
        }
    }

    fn parse_rgb_args(args: &str) -> Option<Rgba> {
        let inner = args.trim().strip_prefix('(')?.strip_suffix(')')?;
        let parts: Vec<&str> = inner
            .split(|c: char| c == ',' || c == '/' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        if parts.len() != 3 && parts.len() != 4 {
            return None;
        }
        let channel = |p: &str| -> Option<u8> {
            if let Some(pct) = p.strip_suffix('%') {
                let f: f64 = pct.trim().parse().ok()?;
                Some((f / 100.0 * 255.0).round().clamp(0.0, 255.0) as u8)
            } else {
                let f: f64 = p.parse().ok()?;
                Some(f.round().clamp(0.0, 255.0) as u8)
            }
        };
        let r = channel(parts[0])?;
        let g = channel(parts[1])?;
        let b = channel(parts[2])?;
        let a = match parts.get(3) {
            None => 1.0,
            Some(p) => {
                if let Some(pct) = p.strip_suffix('%') {
                    pct.trim().parse::<f32>().ok()? / 100.0
                } else {
                    p.parse::<f32>().ok()?
                }
            }
        };
        Some(Rgba {
            r,
            g,
            b,
            a: a.clamp(0.0, 1.0),
        })
    }

    fn named(name: &str) -> Option<Rgba> {
        let (r, g, b) = match name {
            "transparent" => return Some(Rgba::TRANSPARENT),
            "black" => (0x00, 0x00, 0x00),
            "silver" => (0xC0, 0xC0, 0xC0),
            "gray" | "grey" => (0x80, 0x80, 0x80),
            "white" => (0xFF, 0xFF, 0xFF),
            "maroon" => (0x80, 0x00, 0x00),
            "red" => (0xFF, 0x00, 0x00),
            "purple" => (0x80, 0x00, 0x80),
            "fuchsia" | "magenta" => (0xFF, 0x00, 0xFF),
            "green" => (0x00, 0x80, 0x00),
            "lime" => (0x00, 0xFF, 0x00),
            "olive" => (0x80, 0x80, 0x00),
            "yellow" => (0xFF, 0xFF, 0x00),
            "navy" => (0x00, 0x00, 0x80),
            "blue" => (0x00, 0x00, 0xFF),
            "teal" => (0x00, 0x80, 0x80),
            "aqua" | "cyan" => (0x00, 0xFF, 0xFF),
            "orange" => (0xFF, 0xA5, 0x00),
            _ => return None,
        };
        Some(Rgba::opaque(r, g, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_forms() {
        assert_eq!(Rgba::parse("#fff"), Some(Rgba::opaque(255, 255, 255)));
        assert_eq!(Rgba::parse("#777777"), Some(Rgba::opaque(0x77, 0x77, 0x77)));
        assert_eq!(Rgba::parse("#00000080").unwrap().a, 128.0 / 255.0);
        assert_eq!(Rgba::parse("#12345"), None);
    }

    #[test]
    fn functional_forms() {
        assert_eq!(Rgba::parse("rgb(255, 0, 0)"), Some(Rgba::opaque(255, 0, 0)));
        assert_eq!(
            Rgba::parse("rgb(100%, 0%, 0%)"),
            Some(Rgba::opaque(255, 0, 0))
        );
        let half = Rgba::parse("rgba(0, 0, 0, 0.5)").unwrap();
        assert!((half.a - 0.5).abs() < 1e-6);
        assert_eq!(
            Rgba::parse("rgb(0 128 255)"),
            Some(Rgba::opaque(0, 128, 255))
        );
    }

    #[test]
    fn keywords() {
        assert_eq!(Rgba::parse("White"), Some(Rgba::opaque(255, 255, 255)));
        assert_eq!(Rgba::parse("transparent"), Some(Rgba::TRANSPARENT));
        assert_eq!(Rgba::parse("blurple"), None);
    }

    #[test]
    fn compositing() {
        let half_black = Rgba {
            r: 0,
            g: 0,
            b: 0,
            a: 0.5,
        };
        assert_eq!(half_black.over(Rgb::WHITE), Rgb::new(128, 128, 128));
        assert_eq!(Rgba::TRANSPARENT.over(Rgb::WHITE), Rgb::WHITE);
        assert_eq!(Rgba::opaque(1, 2, 3).over(Rgb::WHITE), Rgb::new(1, 2, 3));
    }

    #[test]
    fn display_round_trip() {
        let c = Rgb::new(0xAB, 0xCD, 0xEF);
        assert_eq!(c.to_string(), "#ABCDEF");
        assert_eq!(Rgb::from_hex("#ABCDEF"), Some(c));
    }
}
