//! Hand-written SVG 1.1 scatter plots of 2-D point sets.

use fuzzydr_core::matrix::Matrix;

/// Ten fixed fill colors, cycled by label.
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, Copy)]
pub struct SvgScatter {
    pub width: u32,
    pub height: u32,
    pub point_radius: f64,
}

impl Default for SvgScatter {
    fn default() -> Self {
        SvgScatter { width: 800, height: 600, point_radius: 3.0 }
    }
}

impl SvgScatter {
    /// Renders the first two columns of `points`, colored by label when
    /// labels are given. The data box maps affinely into the viewport with a
    /// 5% margin on every side; the vertical axis points up.
    pub fn render(&self, points: &Matrix, labels: Option<&[usize]>) -> String {
        let n = points.rows();
        let get = |i: usize, c: usize| if points.cols() > c { points.get(i, c) } else { 0.0 };
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            min_x = min_x.min(get(i, 0));
            max_x = max_x.max(get(i, 0));
            min_y = min_y.min(get(i, 1));
            max_y = max_y.max(get(i, 1));
        }
        if n == 0 {
            (min_x, max_x, min_y, max_y) = (0.0, 1.0, 0.0, 1.0);
        }
        // Zero-span axes keep the points centered instead of dividing by 0.
        if max_x <= min_x {
            (min_x, max_x) = (min_x - 0.5, min_x + 0.5);
        }
        if max_y <= min_y {
            (min_y, max_y) = (min_y - 0.5, min_y + 0.5);
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let (margin_x, margin_y) = (0.05 * w, 0.05 * h);
        let span_x = (w - 2.0 * margin_x) / (max_x - min_x);
        let span_y = (h - 2.0 * margin_y) / (max_y - min_y);

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
            self.width, self.height
        ));
        out.push_str(&format!(
            "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
            self.width, self.height
        ));
        for i in 0..n {
            let cx = margin_x + (get(i, 0) - min_x) * span_x;
            let cy = h - margin_y - (get(i, 1) - min_y) * span_y;
            let color = match labels {
                Some(ls) => PALETTE[ls.get(i).copied().unwrap_or(0) % PALETTE.len()],
                None => PALETTE[0],
            };
            out.push_str(&format!(
                "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"{color}\"/>\n",
                self.point_radius
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal well-formedness check: tags balance and attributes are quoted.
    fn assert_well_formed_xml(doc: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = doc;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name), "mismatched close tag");
            } else if !tag.ends_with('/') {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
            assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{tag}>");
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
        assert!(!rest.contains('>'), "stray closing bracket");
    }

    #[test]
    fn scatter_is_well_formed_and_keeps_points_inside_the_margin() {
        let points = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![10.0, 5.0],
            vec![-3.0, 2.0],
            vec![4.0, -8.0],
        ]);
        let doc = SvgScatter::default().render(&points, Some(&[0, 1, 2, 3]));
        assert_well_formed_xml(&doc);
        assert!(doc.contains("version=\"1.1\""));
        assert_eq!(doc.matches("<circle").count(), 4);
        for chunk in doc.split("cx=\"").skip(1) {
            let cx: f64 = chunk.split('"').next().unwrap().parse().unwrap();
            assert!((40.0..=760.0).contains(&cx), "cx {cx} outside the margin");
        }
    }

    #[test]
    fn labels_pick_distinct_palette_colors() {
        let points = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        let doc = SvgScatter::default().render(&points, Some(&[0, 1]));
        assert!(doc.contains(PALETTE[0]) && doc.contains(PALETTE[1]));
    }

    #[test]
    fn degenerate_inputs_still_render() {
        let single = Matrix::from_rows(&[vec![2.0, 2.0]]);
        let doc = SvgScatter::default().render(&single, None);
        assert_well_formed_xml(&doc);
        assert_eq!(doc.matches("<circle").count(), 1);
        let empty = Matrix::zeros(0, 2);
        assert_well_formed_xml(&SvgScatter::default().render(&empty, None));
    }
}
