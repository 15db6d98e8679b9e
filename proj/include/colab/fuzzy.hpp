#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace colab::fuzzy {

/// Decodes UTF-8 into Unicode scalar values. Invalid bytes decode to U+FFFD
/// one byte at a time, so every input has exactly one decoding.
std::u32string decode_utf8(std::string_view utf8);

/// Levenshtein edit distance (unit-cost insert/delete/substitute) between two
/// code-point sequences.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Convenience overload: decodes both arguments from UTF-8 first.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Best sliding-window similarity of the shorter string against the longer
/// one, on a 0..100 scale.
///
/// With pattern P = the shorter input (by code points) and text T = the
/// longer, the score is
///
///   max over i in 0..|T|-|P| of (1 - D(P, T[i : i+|P|]) / |P|) * 100
///
/// where D is the Levenshtein distance. Arguments are swapped when needed so
/// the pattern is always the shorter string; an empty pattern scores 100
/// (zero edits needed). 100 is returned exactly when the shorter string is a
/// contiguous substring of the longer (or the strings are equal).
///
/// The inner distance uses a bit-parallel scan for patterns up to 64 code
/// points and a plain dynamic program above that; both are exact, so the
/// result is identical to enumerating every window.
double partial_similarity(std::string_view a, std::string_view b);
double partial_similarity(std::u32string_view a, std::u32string_view b);

/// Output diversity of a pair: 100 - partial_similarity(a, b). 0 when one
/// string contains the other, 100 when no window shares anything. Symmetric.
double diversity(std::string_view a, std::string_view b);
double diversity(std::u32string_view a, std::u32string_view b);

} // namespace colab::fuzzy
