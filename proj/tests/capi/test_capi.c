/* Exercises the C API from C: handles, status codes, error locations and
   report access. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "nonholo.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_catalog(void) {
  char* names = NULL;
  EXPECT(nh_catalog_names(&names) == NH_OK);
  EXPECT(names && strstr(names, "schwarzschild22") != NULL);
  EXPECT(names && strstr(names, "randers_flat") != NULL);
  nh_string_free(names);
}

static void test_run(void) {
  nh_scenario* s = NULL;
  EXPECT(nh_scenario_load("schwarzschild22", &s) == NH_OK);
  EXPECT(strcmp(nh_scenario_name(s), "schwarzschild22") == 0);
  EXPECT(nh_scenario_dim(s) == 4);

  nh_report* r = NULL;
  EXPECT(nh_suite_run(s, "connections", 1, 20, 1.0, &r) == NH_OK);
  EXPECT(nh_report_all_passed(r) == 1);
  EXPECT(strcmp(nh_report_scenario(r), "schwarzschild22") == 0);
  int found = 0;
  for (int i = 0; i < nh_report_check_count(r); ++i) {
    nh_check_info c;
    EXPECT(nh_report_check(r, i, &c) == NH_OK);
    EXPECT(c.points == 20);
    EXPECT(c.residual <= c.tol);
    if (strcmp(c.id, "connections.vacuum_einstein.levi_civita") == 0) found = 1;
  }
  EXPECT(found);
  nh_check_info dummy;
  EXPECT(nh_report_check(r, 10000, &dummy) == NH_INVALID_ARGUMENT);

  char* js = NULL;
  EXPECT(nh_report_format(r, "json", &js) == NH_OK);
  nh_report* back = NULL;
  EXPECT(nh_report_parse(js, &back) == NH_OK);
  EXPECT(nh_report_check_count(back) == nh_report_check_count(r));
  char* js2 = NULL;
  EXPECT(nh_report_format(back, "json", &js2) == NH_OK);
  EXPECT(js && js2 && strcmp(js, js2) == 0);
  nh_string_free(js);
  nh_string_free(js2);
  nh_report_free(back);

  char* text = NULL;
  EXPECT(nh_report_format(r, "text", &text) == NH_OK);
  EXPECT(text && strstr(text, "0 failed") != NULL);
  nh_string_free(text);
  EXPECT(nh_report_format(r, "xml", &text) == NH_INVALID_ARGUMENT);
  EXPECT(nh_report_write(r, "json", "/nonexistent/dir/out.json") == NH_IO_ERROR);
  nh_report_free(r);

  EXPECT(nh_suite_run(s, "everything", 1, 5, 1.0, &r) == NH_INVALID_ARGUMENT);
  EXPECT(nh_crosscheck(s, 2, 5, 1.0, &r) == NH_OK);
  EXPECT(nh_report_all_passed(r) == 1);
  nh_report_free(r);
  nh_scenario_free(s);
}

static void test_errors(void) {
  nh_scenario* s = NULL;
  const char* bad = "{\n  \"name\": \"x\",\n  \"chart\": }\n}";
  EXPECT(nh_scenario_parse(bad, &s) == NH_PARSE_ERROR);
  EXPECT(nh_last_error_line() == 3);
  EXPECT(nh_last_error_column() == 12);
  EXPECT(strstr(nh_last_error(), "ParseError") != NULL);
  EXPECT(strcmp(nh_status_name(NH_PARSE_ERROR), "ParseError") == 0);
  EXPECT(strcmp(nh_status_name(NH_OK), "Ok") == 0);

  EXPECT(nh_scenario_load("/nonexistent/scenario.json", &s) == NH_IO_ERROR);
  EXPECT(nh_last_error_line() == 0);
  EXPECT(nh_scenario_load(NULL, &s) == NH_INVALID_ARGUMENT);

  const char* euclid =
      "{\"name\": \"e\", \"chart\": {\"n\": 2, \"m\": 2, \"signature\": [1, 1, 1, 1]}, \"kind\": \"metric\","
      " \"g\": [\"1\", \"0\", \"0\", \"1\"], \"h\": [\"1\", \"0\", \"0\", \"1\"],"
      " \"sample\": {\"box\": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]]}}";
  EXPECT(nh_scenario_parse(euclid, &s) == NH_OK);
  nh_report* r = NULL;
  EXPECT(nh_suite_run(s, "spin", 1, 3, 1.0, &r) == NH_SUITE_INAPPLICABLE);
  EXPECT(nh_suite_run(s, "frames", 1, 0, 1.0, &r) == NH_INVALID_ARGUMENT);
  EXPECT(nh_suite_run(s, "frames", 1, 3, -1.0, &r) == NH_INVALID_ARGUMENT);
  EXPECT(nh_suite_run(s, "frames", 1, 3, 1.0, &r) == NH_OK);
  EXPECT(strlen(nh_last_error()) == 0);
  nh_report_free(r);
  nh_scenario_free(s);

  /* a failed check keeps its residual verbatim */
  const char* failed =
      "{\"scenario\": \"x\", \"checks\": [{\"id\": \"a\", \"anchor\": \"b\", \"residual\": 0.5, \"tol\": 0.1,"
      " \"pass\": false, \"points\": 3, \"ms\": 1.0}]}";
  EXPECT(nh_report_parse(failed, &r) == NH_OK);
  nh_check_info c;
  EXPECT(nh_report_check(r, 0, &c) == NH_OK);
  EXPECT(c.pass == 0 && c.residual == 0.5 && c.tol == 0.1);
  EXPECT(nh_report_all_passed(r) == 0);
  nh_report_free(r);
  EXPECT(nh_report_parse("{\"scenario\": 3}", &r) == NH_VALIDATION_ERROR);
}

int main(void) {
  test_catalog();
  test_run();
  test_errors();
  if (failures) {
    fprintf(stderr, "%d C API expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API tests passed\n");
  return 0;
}
