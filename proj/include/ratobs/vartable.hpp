#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ratobs/errors.hpp"

namespace ratobs {

enum class VarRole { State, Parameter, Tag, Auxiliary };

// Session-wide variable registry. Append-only: indices are stable, so values
// built over a prefix of the table stay valid when later phases add tag or
// auxiliary variables. Single writer per synthesis session.
class VarTable {
  public:
    int add(const std::string &name, VarRole role) {
        if (index_.count(name)) throw Error("duplicate variable: " + name);
        names_.push_back(name);
        roles_.push_back(role);
        index_[name] = static_cast<int>(names_.size()) - 1;
        return index_[name];
    }

    int find(const std::string &name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string &name(int v) const { return names_.at(v); }
    VarRole role(int v) const { return roles_.at(v); }

    std::vector<int> indices_with_role(VarRole r) const {
        std::vector<int> out;
        for (int v = 0; v < size(); ++v)
            if (roles_[v] == r) out.push_back(v);
        return out;
    }

  private:
    std::vector<std::string> names_;
    std::vector<VarRole> roles_;
    std::map<std::string, int> index_;
};

using VarTablePtr = std::shared_ptr<VarTable>;

inline VarTablePtr make_table() { return std::make_shared<VarTable>(); }

} // namespace ratobs
