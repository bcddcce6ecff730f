//! Arithmetic decomposition of precomposed Hangul syllable blocks.

pub const SYLLABLE_BASE: u32 = 0xAC00;
pub const SYLLABLE_LAST: u32 = 0xD7A3;
pub const INITIAL_COUNT: u32 = 19;
pub const MEDIAL_COUNT: u32 = 21;
pub const FINAL_COUNT: u32 = 28;
/// Blocks sharing one initial consonant (`MEDIAL_COUNT * FINAL_COUNT`).
pub const BLOCKS_PER_INITIAL: u32 = MEDIAL_COUNT * FINAL_COUNT;
pub const BLOCK_COUNT: u32 = INITIAL_COUNT * BLOCKS_PER_INITIAL;

const INITIAL_JAMO_BASE: u32 = 0x1100;
const MEDIAL_JAMO_BASE: u32 = 0x1161;
// Final index 0 means "no final", so index 1 maps to U+11A8.
const FINAL_JAMO_BASE: u32 = 0x11A7;

/// Jamo indices of one syllable block. `final_` is 0 when the block has no
/// final consonant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Jamo {
    pub initial: u8,
    pub medial: u8,
    pub final_: u8,
}

pub fn is_syllable(c: char) -> bool {
    (SYLLABLE_BASE..=SYLLABLE_LAST).contains(&(c as u32))
}

pub fn contains_hangul(text: &str) -> bool {
    text.chars().any(is_syllable)
}

pub fn count_syllable_blocks(text: &str) -> usize {
    text.chars().filter(|&c| is_syllable(c)).count()
}

pub fn decompose(c: char) -> Option<Jamo> {
    if !is_syllable(c) {
        return None;
    }
    let index = c as u32 - SYLLABLE_BASE;
    Some(Jamo {
        initial: (index / BLOCKS_PER_INITIAL) as u8,
        medial: ((index % BLOCKS_PER_INITIAL) / FINAL_COUNT) as u8,
        final_: (index % FINAL_COUNT) as u8,
    })
}

pub fn compose(jamo: Jamo) -> Option<char> {
    let (i, m, f) = (jamo.initial as u32, jamo.medial as u32, jamo.final_ as u32);
    if i >= INITIAL_COUNT || m >= MEDIAL_COUNT || f >= FINAL_COUNT {
        return None;
    }
    char::from_u32(SYLLABLE_BASE + (i * MEDIAL_COUNT + m) * FINAL_COUNT + f)
}

/// Conjoining jamo code point for an initial index (U+1100..).
pub fn initial_jamo_char(index: u8) -> Option<char> {
    ((index as u32) < INITIAL_COUNT).then(|| char::from_u32(INITIAL_JAMO_BASE + index as u32))?
}

pub fn medial_jamo_char(index: u8) -> Option<char> {
    ((index as u32) < MEDIAL_COUNT).then(|| char::from_u32(MEDIAL_JAMO_BASE + index as u32))?
}

/// Conjoining jamo for a final index; index 0 (no final) has no character.
pub fn final_jamo_char(index: u8) -> Option<char> {
    (index > 0 && (index as u32) < FINAL_COUNT).then(|| char::from_u32(FINAL_JAMO_BASE + index as u32))?
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JamoPosition {
    Initial,
    Medial,
    Final,
}

/// Classify a conjoining jamo character into its position and index.
pub fn jamo_slot(c: char) -> Option<(JamoPosition, u8)> {
    let cp = c as u32;
    if (INITIAL_JAMO_BASE..INITIAL_JAMO_BASE + INITIAL_COUNT).contains(&cp) {
        Some((JamoPosition::Initial, (cp - INITIAL_JAMO_BASE) as u8))
    } else if (MEDIAL_JAMO_BASE..MEDIAL_JAMO_BASE + MEDIAL_COUNT).contains(&cp) {
        Some((JamoPosition::Medial, (cp - MEDIAL_JAMO_BASE) as u8))
    } else if (FINAL_JAMO_BASE + 1..FINAL_JAMO_BASE + FINAL_COUNT).contains(&cp) {
        Some((JamoPosition::Final, (cp - FINAL_JAMO_BASE) as u8))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposes_known_blocks() {
        // 숨 = ㅅ(9) ㅜ(13) ㅁ(16)
        assert_eq!(decompose('숨'), Some(Jamo { initial: 9, medial: 13, final_: 16 }));
        // 안 = ㅇ(11) ㅏ(0) ㄴ(4)
        assert_eq!(decompose('안'), Some(Jamo { initial: 11, medial: 0, final_: 4 }));
        assert_eq!(decompose('가'), Some(Jamo { initial: 0, medial: 0, final_: 0 }));
        assert_eq!(decompose('a'), None);
        assert_eq!(decompose('ㄱ'), None);
    }

    #[test]
    fn block_bounds() {
        assert_eq!(BLOCK_COUNT, 11_172);
        assert!(is_syllable('\u{AC00}'));
        assert!(is_syllable('\u{D7A3}'));
        assert!(!is_syllable('\u{D7A4}'));
        assert!(!is_syllable('\u{ABFF}'));
    }

    #[test]
    fn compose_rejects_out_of_range() {
        assert_eq!(compose(Jamo { initial: 19, medial: 0, final_: 0 }), None);
        assert_eq!(compose(Jamo { initial: 0, medial: 21, final_: 0 }), None);
        assert_eq!(compose(Jamo { initial: 0, medial: 0, final_: 28 }), None);
    }

    #[test]
    fn conjoining_jamo_slots() {
        assert_eq!(initial_jamo_char(9), Some('\u{1109}'));
        assert_eq!(jamo_slot('\u{1109}'), Some((JamoPosition::Initial, 9)));
        assert_eq!(jamo_slot('\u{11B7}'), Some((JamoPosition::Final, 16)));
        assert_eq!(final_jamo_char(0), None);
        assert_eq!(final_jamo_char(16), Some('\u{11B7}'));
        assert_eq!(jamo_slot(medial_jamo_char(13).unwrap()), Some((JamoPosition::Medial, 13)));
    }
}
