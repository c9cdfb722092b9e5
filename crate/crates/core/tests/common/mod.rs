//! Shared regression fixtures: a 25-value numeric stream and a 15-title
//! string stream with fully pinned selection behavior, each with a variant
//! that exercises the forced final replacement.

/// Numeric regression stream. With m=5 the first five distinct values fill
/// the buffer and the remaining 20 form the selection stream.
pub const NUMERIC_STREAM: [f64; 25] = [
    711.56, 121.65, 7498.12, 2866.83, 794.47, 7638.57, 9561.95, 6819.74, 8324.07, 2753.54,
    -272.60, 3396.49, 3857.34, 5266.30, 2788.52, 4681.03, 6.34, 5494.43, -8914.71, 7603.40,
    1428.25, 591.98, 3332.02, 9255.67, 7133.70,
];

/// Same stream with the large negative value flipped positive, which leaves
/// the scan-phase threshold unbeaten and forces the final replacement.
pub fn numeric_stream_variant() -> Vec<f64> {
    NUMERIC_STREAM
        .iter()
        .map(|&v| if v == -8914.71 { 8914.71 } else { v })
        .collect()
}

/// String regression stream of book titles. With m=5, k=5 the first five
/// fill the buffer, the next five are scanned, and selection runs to n=10.
pub const BOOK_TITLES: [&str; 15] = [
    "A Brief History of Time",
    "Alice Munro: Selected Stories",
    "Bel Canto",
    "Charlie and the Chocolate Factory",
    "Daring Greatly: How the Courage to Be Vulnerable Transforms the Way We Live, Love, Parent, \
     and Lead",
    "Great Expectations",
    "Harry Potter and the Sorcerer's Stone",
    "Invisible Man",
    "In Cold Blood",
    "Jimmy Corrigan: Smartest Kid on Earth",
    "Kitchen Confidential",
    "The Devil in the White City: Murder, Magic, and Madness at the Fair that Changed America",
    "Love in the Time of Cholera",
    "Man's Search for Meaning",
    "The Lion, the Witch and the Wardrobe",
];

/// Variant with the high-gain title replaced, which leaves the scan-phase
/// threshold unbeaten and forces the final replacement.
pub fn book_titles_variant() -> Vec<String> {
    BOOK_TITLES
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == 11 {
                "Life After Life".to_string()
            } else {
                t.to_string()
            }
        })
        .collect()
}
