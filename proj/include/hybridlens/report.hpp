#pragma once

#include <string>
#include <vector>

namespace hybridlens {

/// One checked condition. `value` is the measured quantity, `threshold`
/// the limit it was compared against, `margin` how far inside (positive)
/// or outside (negative) the passing region it landed.
struct ConditionEntry {
  std::string id;
  std::string name;
  double value{0.0};
  double threshold{0.0};
  double margin{0.0};
  bool passed{false};
  std::string detail;
};

struct ConditionReport {
  std::string title;
  std::vector<ConditionEntry> entries;
  /// Warnings and recognized special cases that do not change pass/fail.
  std::vector<std::string> notes;

  bool passed() const {
    for (const auto& e : entries)
      if (!e.passed) return false;
    return true;
  }

  const ConditionEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (!e.passed) out.push_back(e.name);
    return out;
  }

  void add(ConditionEntry e) { entries.push_back(std::move(e)); }

  /// Appends all entries and notes of other.
  void merge(const ConditionReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
  }
};

}  // namespace hybridlens
