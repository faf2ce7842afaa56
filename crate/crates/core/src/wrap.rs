//! Greedy word wrapping by character count.

/// Characters that fit a cell of `width_mm` at `char_mm` per character, one
/// column kept for the border.
pub fn char_budget(width_mm: f64, char_mm: f64) -> usize {
    ((width_mm / char_mm).floor() as usize)
        .saturating_sub(1)
        .max(1)
}

/// Wraps `text` to lines of at most `max_chars` characters. Explicit line
/// breaks are kept; words longer than a line are cut.
pub fn wrap_text(text: &str, max_chars: usize) -> Vec<String> {
    let max = max_chars.max(1);
    if text.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for paragraph in text.split('\n') {
        let mut line = String::new();
        let mut len = 0;
        let mut any = false;
        for word in paragraph.split(' ').filter(|w| !w.is_empty()) {
            any = true;
            let mut chars: Vec<char> = word.chars().collect();
            let sep = usize::from(len > 0);
            if len + sep + chars.len() <= max {
                if sep == 1 {
                    line.push(' ');
                }
                line.extend(&chars);
                len += sep + chars.len();
                continue;
            }
            if len > 0 {
                out.push(std::mem::take(&mut line));
            }
            while chars.len() > max {
                out.push(chars.drain(..max).collect());
            }
            line.extend(&chars);
            len = chars.len();
        }
        if !any || len > 0 {
            out.push(line);
        }
    }
    out
}
