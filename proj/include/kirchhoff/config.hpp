#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace kirchhoff {

// Flat key = value text; '#' starts a comment. Later keys override earlier ones.
class KeyValues {
public:
    static KeyValues parse(std::istream& in, const std::string& origin = "<input>")
    {
        KeyValues kv;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos)
                line.erase(h);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            kv.set(key, trim(line.substr(eq + 1)));
        }
        return kv;
    }

    static KeyValues load(const std::string& path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse(f, path);
    }

    void set(const std::string& k, const std::string& v) { vals_[k] = v; }
    bool has(const std::string& k) const { return vals_.count(k) != 0; }
    const std::map<std::string, std::string>& entries() const { return vals_; }

    std::string str(const std::string& k, const std::string& def) const
    {
        used_.insert(k);
        auto it = vals_.find(k);
        return it == vals_.end() ? def : it->second;
    }

    double num(const std::string& k, double def) const
    {
        if (!has(k)) {
            used_.insert(k);
            return def;
        }
        return to_double(k, str(k, ""));
    }

    long integer(const std::string& k, long def) const
    {
        const double d = num(k, double(def));
        if (d != double(long(d)))
            throw ConfigError("key '" + k + "' must be an integer");
        return long(d);
    }

    bool flag(const std::string& k, bool def) const
    {
        if (!has(k)) {
            used_.insert(k);
            return def;
        }
        const std::string v = str(k, "");
        if (v == "1" || v == "true" || v == "yes")
            return true;
        if (v == "0" || v == "false" || v == "no")
            return false;
        throw ConfigError("key '" + k + "' must be a boolean, got '" + v + "'");
    }

    std::vector<double> list(const std::string& k, std::vector<double> def) const
    {
        if (!has(k)) {
            used_.insert(k);
            return def;
        }
        std::vector<double> out;
        std::stringstream ss(str(k, ""));
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(to_double(k, trim(item)));
        if (out.empty())
            throw ConfigError("key '" + k + "' is an empty list");
        return out;
    }

    // Keys present but never read.
    std::vector<std::string> unused() const
    {
        std::vector<std::string> out;
        for (const auto& [k, v] : vals_)
            if (!used_.count(k))
                out.push_back(k);
        return out;
    }

private:
    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& k, const std::string& v)
    {
        try {
            std::size_t n = 0;
            const double d = std::stod(v, &n);
            if (n != v.size())
                throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("key '" + k + "' is not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::string> vals_;
    mutable std::set<std::string> used_;
};

} // namespace kirchhoff
