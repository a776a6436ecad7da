/**
 * This code is part of gbfkit.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE.txt file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 *
 * Any modifications or derivative works of this code must retain this
 * copyright notice, and modified files need to carry a notice indicating
 * that they have been altered from the originals.
 */

#ifndef GBF_REPORT_HPP
#define GBF_REPORT_HPP

#include <algorithm>
#include <string>
#include <vector>

namespace gbf {

/// Outcome of one check: the check id names the axiom and the record it ran
/// against, e.g. "T5b:glue:circle".
struct CheckResult {
  std::string id;
  std::string subject;  // region or gluing the check ran on
  double max_deviation = 0;
  bool pass = true;
  std::string details;
};

struct Report {
  std::vector<CheckResult> results;

  void add(CheckResult r) { results.push_back(std::move(r)); }

  void merge(const Report& other) {
    results.insert(results.end(), other.results.begin(), other.results.end());
  }

  bool pass() const {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.pass; });
  }

  double max_deviation() const {
    double m = 0;
    for (const auto& r : results) m = std::max(m, r.max_deviation);
    return m;
  }

  void sort_by_id() {
    std::sort(results.begin(), results.end(), [](const CheckResult& a, const CheckResult& b) {
      return a.id == b.id ? a.subject < b.subject : a.id < b.id;
    });
  }
};

inline CheckResult make_result(std::string id, std::string subject, double dev, double tol,
                               std::string details = "") {
  CheckResult r;
  r.id = std::move(id);
  r.subject = std::move(subject);
  r.max_deviation = dev;
  r.pass = dev <= tol;
  r.details = std::move(details);
  return r;
}

}  // namespace gbf

#endif  // GBF_REPORT_HPP
