#pragma once

#include <string>
#include <vector>

namespace vertexkit {

// One named property check.  `checked` counts instances that were decided,
// `skipped` those whose data lies outside the known window.
struct CheckItem {
    std::string name;
    bool pass = true;
    long checked = 0;
    long skipped = 0;
    std::vector<std::string> failures;  // located witnesses, first few only
};

class Report {
public:
    CheckItem& item(const std::string& name);
    void record(const std::string& name, bool ok, const std::string& where = {});
    void skip(const std::string& name);
    void merge(const Report& other, const std::string& prefix = {});

    bool ok() const;
    const std::vector<CheckItem>& items() const { return items_; }
    const CheckItem* find(const std::string& name) const;
    bool passed(const std::string& name) const;  // false when absent
    std::string format() const;

private:
    std::vector<CheckItem> items_;
};

}  // namespace vertexkit
