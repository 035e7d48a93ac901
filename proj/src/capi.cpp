// Copyright 2026 The softlimit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "softlimit/softlimit.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "softlimit/runner.hpp"
#include "softlimit/sdp.hpp"
#include "softlimit/serialize.hpp"

struct sl_system {
  softlimit::SoftSystem sys;
};

struct sl_map {
  softlimit::CPMap map;
};

namespace {

thread_local std::string g_last_error;

sl_status fail(sl_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
sl_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return SL_OK;
  } catch (const softlimit::Error& e) {
    return fail(static_cast<sl_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SL_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw softlimit::Error(softlimit::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* sl_version(void) { return softlimit::kVersion; }

const char* sl_last_error(void) { return g_last_error.c_str(); }

void sl_string_free(char* s) { std::free(s); }

sl_status sl_system_builtin(const char* name, const char* params_json, sl_system** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    softlimit::Json system = params_json ? softlimit::parse_json(params_json) : softlimit::Json::object();
    if (!system.is_object()) {
      throw softlimit::Error(softlimit::ErrorCode::kConfigInvalid, "params must be a JSON object");
    }
    system["builtin"] = name;
    const softlimit::ExperimentConfig cfg =
        softlimit::parse_config(softlimit::Json{{"experiment", "verify"}, {"system", system}});
    *out = new sl_system{softlimit::load_system(cfg).soft};
  });
}

sl_status sl_system_load_json(const char* json, sl_system** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new sl_system{softlimit::system_from_json(softlimit::parse_json(json))};
  });
}

sl_status sl_system_to_json(const sl_system* sys, char** out_json) {
  return guarded([&] {
    require(sys, "system");
    require(out_json, "out_json");
    *out_json = dup_string(softlimit::system_to_json(sys->sys).dump());
  });
}

sl_status sl_system_horizon(const sl_system* sys, size_t* out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "out");
    *out = sys->sys.horizon();
  });
}

sl_status sl_system_strictify(const sl_system* sys, sl_system** out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "out");
    *out = new sl_system{softlimit::strictify(sys->sys)};
  });
}

sl_status sl_system_residual(const sl_system* sys, double* out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "out");
    *out = softlimit::exact_transitivity_residual(sys->sys);
  });
}

sl_status sl_system_defects_csv(const sl_system* sys, const char* norm, char** out_csv) {
  return guarded([&] {
    require(sys, "system");
    require(out_csv, "out_csv");
    softlimit::DefectOptions opts;
    opts.kind = softlimit::parse_norm_kind(norm ? norm : "pointwise");
    const softlimit::DefectReport rep = softlimit::transitivity_defects(sys->sys, opts);
    std::ostringstream csv;
    csv << "m,n,l,probe_id,defect,norm_kind\r\n";
    char buf[32];
    for (const softlimit::DefectRow& r : rep.rows) {
      std::snprintf(buf, sizeof buf, "%.17g", r.defect);
      csv << r.m << ',' << r.n << ',' << r.l << ',' << r.probe_id << ',' << buf << ','
          << softlimit::norm_kind_name(r.kind) << "\r\n";
    }
    *out_csv = dup_string(csv.str());
  });
}

void sl_system_free(sl_system* sys) { delete sys; }

sl_status sl_system_map(const sl_system* sys, size_t n, size_t m, sl_map** out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "out");
    if (n >= sys->sys.horizon() || m >= n) {
      throw softlimit::Error(softlimit::ErrorCode::kInvalidArgument, "need m < n < horizon");
    }
    *out = new sl_map{sys->sys.map(n, m)};
  });
}

sl_status sl_map_from_json(const char* json, sl_map** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new sl_map{softlimit::map_from_json(softlimit::parse_json(json))};
  });
}

sl_status sl_map_to_json(const sl_map* map, char** out_json) {
  return guarded([&] {
    require(map, "map");
    require(out_json, "out_json");
    softlimit::Json j = softlimit::map_to_json(map->map);
    j["kind"] = "map";
    *out_json = dup_string(j.dump());
  });
}

sl_status sl_map_subtract(const sl_map* a, const sl_map* b, sl_map** out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = new sl_map{a->map - b->map};
  });
}

sl_status sl_map_verify(const sl_map* map, int* flags, double* min_choi_eig) {
  return guarded([&] {
    require(map, "map");
    const softlimit::MapFlags& f = map->map.flags();
    if (flags) *flags = (f.cp ? 1 : 0) | (f.unital ? 2 : 0) | (f.ucp ? 4 : 0) | (f.cpc ? 8 : 0);
    if (min_choi_eig) *min_choi_eig = f.min_choi_eig;
  });
}

sl_status sl_map_cb_norm(const sl_map* map, double* out) {
  return guarded([&] {
    require(map, "map");
    require(out, "out");
    *out = softlimit::cb_norm(map->map);
  });
}

sl_status sl_map_norm_interval(const sl_map* map, unsigned long long seed, double* lower,
                               double* upper) {
  return guarded([&] {
    require(map, "map");
    softlimit::NormSearchOptions o;
    o.seed = seed;
    const softlimit::NormInterval iv = softlimit::map_norm_interval(map->map, o);
    if (lower) *lower = iv.lower;
    if (upper) *upper = iv.upper;
  });
}

void sl_map_free(sl_map* map) { delete map; }

int sl_run_experiment(const char* config_json, const char* out_dir) {
  try {
    g_last_error.clear();
    if (!config_json) {
      g_last_error = "config is null";
      return 2;
    }
    softlimit::ExperimentConfig cfg = softlimit::parse_config_text(config_json);
    if (out_dir) cfg.out_dir = out_dir;
    const softlimit::RunResult r = softlimit::run(cfg);
    if (r.exit_code != 0) g_last_error = r.message;
    return r.exit_code;
  } catch (const softlimit::Error& e) {
    g_last_error = e.what();
    return softlimit::exit_code_for(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 3;
  }
}

sl_status sl_roundtrip_file(const char* path, int* fixed_point) {
  return guarded([&] {
    require(path, "path");
    require(fixed_point, "fixed_point");
    *fixed_point = softlimit::roundtrip(path) ? 1 : 0;
  });
}

}  // extern "C"
