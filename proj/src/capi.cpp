#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "nonholo.h"
#include "nonholo/suite.hpp"

using namespace nonholo;

struct nh_scenario {
  Scenario value;
};

struct nh_report {
  Report value;
};

static_assert(static_cast<int>(ErrorCode::OrderUnsupported) == NH_ORDER_UNSUPPORTED);
static_assert(static_cast<int>(ErrorCode::ParseError) == NH_PARSE_ERROR);
static_assert(static_cast<int>(ErrorCode::InvalidArgument) == NH_INVALID_ARGUMENT);

namespace {

struct LastError {
  std::string message;
  int line = 0;
  int column = 0;
};
thread_local LastError last_error;

nh_status record(nh_status st, const std::string& msg, int line = 0, int col = 0) {
  last_error = {msg, line, col};
  return st;
}

// Runs f, translating exceptions into status codes.
template <class F>
nh_status guard(F&& f) {
  try {
    f();
    last_error = {};
    return NH_OK;
  } catch (const ParseFailure& e) {
    return record(NH_PARSE_ERROR, e.what(), e.line(), e.column());
  } catch (const Error& e) {
    return record(static_cast<nh_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(NH_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(NH_INTERNAL, e.what());
  } catch (...) {
    return record(NH_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* nh_version(void) { return "0.1.0"; }

const char* nh_status_name(nh_status status) {
  if (status == NH_OK) return "Ok";
  if (status == NH_INTERNAL) return "Internal";
  if (status < NH_ORDER_UNSUPPORTED || status > NH_INVALID_ARGUMENT) return "Unknown";
  return error_code_name(static_cast<ErrorCode>(status));
}

const char* nh_last_error(void) { return last_error.message.c_str(); }
int nh_last_error_line(void) { return last_error.line; }
int nh_last_error_column(void) { return last_error.column; }

void nh_string_free(char* s) { std::free(s); }

nh_status nh_catalog_names(char** out) {
  return guard([&] {
    need(out, "out");
    std::string s;
    for (const auto& n : catalog_names()) s += (s.empty() ? "" : "\n") + n;
    *out = copy_string(s);
  });
}

nh_status nh_scenario_load(const char* name_or_path, nh_scenario** out) {
  return guard([&] {
    need(name_or_path, "name_or_path");
    need(out, "out");
    *out = new nh_scenario{load_scenario(name_or_path)};
  });
}

nh_status nh_scenario_parse(const char* json_text, nh_scenario** out) {
  return guard([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new nh_scenario{parse_scenario(json_text)};
  });
}

void nh_scenario_free(nh_scenario* s) { delete s; }

const char* nh_scenario_name(const nh_scenario* s) { return s ? s->value.name.c_str() : ""; }

int nh_scenario_dim(const nh_scenario* s) { return s ? s->value.chart.dim() : 0; }

nh_status nh_suite_run(const nh_scenario* s, const char* suite, uint64_t seed, int points, double tol_scale,
                       nh_report** out) {
  return guard([&] {
    need(s, "scenario");
    need(suite, "suite");
    need(out, "out");
    *out = new nh_report{run_suite(s->value, parse_suite(suite), {seed, points, tol_scale})};
  });
}

nh_status nh_crosscheck(const nh_scenario* s, uint64_t seed, int points, double tol_scale, nh_report** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = new nh_report{crosscheck(s->value, {seed, points, tol_scale})};
  });
}

void nh_report_free(nh_report* r) { delete r; }

const char* nh_report_scenario(const nh_report* r) { return r ? r->value.scenario.c_str() : ""; }

int nh_report_check_count(const nh_report* r) { return r ? static_cast<int>(r->value.checks.size()) : 0; }

nh_status nh_report_check(const nh_report* r, int index, nh_check_info* out) {
  return guard([&] {
    need(r, "report");
    need(out, "out");
    if (index < 0 || index >= static_cast<int>(r->value.checks.size()))
      fail(ErrorCode::InvalidArgument, "check index out of range");
    const CheckRecord& c = r->value.checks[index];
    *out = {c.id.c_str(), c.anchor.c_str(), c.residual, c.tol, c.pass ? 1 : 0, c.points, c.ms};
  });
}

int nh_report_all_passed(const nh_report* r) { return r && r->value.all_passed() ? 1 : 0; }

nh_status nh_report_format(const nh_report* r, const char* format, char** out) {
  return guard([&] {
    need(r, "report");
    need(format, "format");
    need(out, "out");
    const std::string f = format;
    if (f == "json")
      *out = copy_string(report_to_json(r->value));
    else if (f == "text")
      *out = copy_string(report_to_text(r->value));
    else
      fail(ErrorCode::InvalidArgument, "format must be json or text");
  });
}

nh_status nh_report_write(const nh_report* r, const char* format, const char* path) {
  return guard([&] {
    need(r, "report");
    need(format, "format");
    need(path, "path");
    write_report(r->value, format, path);
  });
}

nh_status nh_report_parse(const char* json_text, nh_report** out) {
  return guard([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new nh_report{report_from_json(json_text)};
  });
}

}  // extern "C"
