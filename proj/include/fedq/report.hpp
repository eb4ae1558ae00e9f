#pragma once

#include <string>
#include <vector>

namespace fedq {

// Pass/fail log shared by the validator batteries.  Failures are reported,
// never thrown.
struct CheckReport {
    struct Item {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::vector<Item> items;

    void add(std::string name, bool pass, std::string detail = "") {
        items.push_back({std::move(name), pass, std::move(detail)});
    }
    void merge(const CheckReport& o) {
        items.insert(items.end(), o.items.begin(), o.items.end());
    }
    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
    std::string summary() const {
        std::string s;
        for (const auto& it : items) {
            s += (it.pass ? "pass  " : "FAIL  ") + it.name;
            if (!it.detail.empty()) s += "  [" + it.detail + "]";
            s += "\n";
        }
        return s;
    }
};

} // namespace fedq
