#pragma once

#include <string>
#include <vector>

namespace ptmchain {

std::string trim(const std::string& s);
std::string to_lower(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);
bool ends_with(const std::string& s, const std::string& suffix);
bool contains(const std::string& haystack, const std::string& needle);
std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

/// Splits on runs of whitespace; no empty elements.
std::vector<std::string> split_words(const std::string& s);

/// Normalizes CRLF and lone CR to LF.
std::string normalize_newlines(const std::string& s);

}  // namespace ptmchain
