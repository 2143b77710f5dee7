/* Exercises the C interface from C. Exits nonzero on the first failure. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "npivqb.h"

static int failures = 0;

#define EXPECT(cond)                                                      \
    do {                                                                  \
        if (!(cond)) {                                                    \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                   \
        }                                                                 \
    } while (0)

#define EXPECT_OK(call)                                                                        \
    do {                                                                                       \
        npq_status s_ = (call);                                                                \
        if (s_ != NPQ_OK) {                                                                    \
            fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, npq_status_name(s_), \
                    npq_last_error());                                                         \
            ++failures;                                                                        \
        }                                                                                      \
    } while (0)

static const char* kDesign =
    "{\"kind\":\"mild\",\"r\":1,\"scale\":0.06,\"L\":15,\"s\":2,\"rho_U\":0.1,\"sigma_e\":0.14,\"seed\":5}";

static void test_status_helpers(void) {
    EXPECT(strcmp(npq_status_name(NPQ_ERR_STUCK_CHAIN), "stuck_chain") == 0);
    EXPECT(npq_status_category(NPQ_OK) == NPQ_CATEGORY_NONE);
    EXPECT(npq_status_category(NPQ_ERR_CONFIGURATION) == NPQ_CATEGORY_VALIDATION);
    EXPECT(npq_status_category(NPQ_ERR_CSV_OUT_OF_RANGE) == NPQ_CATEGORY_VALIDATION);
    EXPECT(npq_status_category(NPQ_ERR_STUCK_CHAIN) == NPQ_CATEGORY_NUMERICAL);
    EXPECT(npq_status_category(NPQ_ERR_ILL_CONDITIONED) == NPQ_CATEGORY_NUMERICAL);
    EXPECT(npq_status_category(NPQ_ERR_INTERNAL) == NPQ_CATEGORY_INTERNAL);
    EXPECT(strlen(npq_version()) > 0);
}

static void test_design(void) {
    npq_design* d = NULL;
    double v = 0.0, spectrum[32];
    size_t len = 0;

    EXPECT(npq_design_create(NPQ_MILD, 1.0, 0.1, 100, 2.0, 0.0, 0.0, &d) == NPQ_ERR_CONFIGURATION);
    EXPECT(d == NULL);
    EXPECT(strstr(npq_last_error(), "positivity") != NULL);

    EXPECT_OK(npq_design_create(NPQ_SEVERE, 1.0, 0.2, 15, 2.0, 0.0, 0.0, &d));
    EXPECT_OK(npq_design_true_tau(d, 1, &v));
    EXPECT(fabs(v - 0.2 * exp(-1.0)) < 1e-12);
    EXPECT(npq_design_true_tau(d, 5, &v) == NPQ_ERR_SPECTRUM_EXHAUSTED);
    EXPECT_OK(npq_design_density(d, 0.5, 0.5, &v));
    EXPECT(npq_design_density(d, 2.0, 0.5, &v) == NPQ_ERR_DOMAIN);

    /* Buffer protocol: a short buffer reports the needed length. */
    EXPECT(npq_design_spectrum(d, spectrum, 4, &len) == NPQ_ERR_BUFFER_TOO_SMALL);
    EXPECT(len == 15);
    EXPECT_OK(npq_design_spectrum(d, spectrum, 32, &len));
    EXPECT(fabs(spectrum[1] - 0.2 * exp(-2.0)) < 1e-15);
    npq_design_free(d);

    EXPECT(npq_design_true_tau(NULL, 1, &v) == NPQ_ERR_NULL_ARGUMENT);
    EXPECT(npq_design_from_json("{\"kind\":\"odd\"}", &d) == NPQ_ERR_CONFIGURATION);
    EXPECT(npq_design_from_json("not json", &d) == NPQ_ERR_CONFIGURATION);
}

static void test_sample_and_moments(void) {
    npq_design* d = NULL;
    npq_sample* s = NULL;
    npq_sample* one = NULL;
    npq_moments* m = NULL;
    double y = 2.0, x = 0.5, w = 0.5, tau = 0.0, ll = 0.0, b[4] = {0, 0, 0, 0}, coeffs[4];
    size_t len = 0;
    double bad_x = 1.5;

    EXPECT_OK(npq_design_from_json(kDesign, &d));
    EXPECT_OK(npq_sample_simulate(d, 5000, 9, &s));
    EXPECT(npq_sample_size(s) == 5000);

    EXPECT_OK(npq_moments_compute(s, NPQ_BASIS_COSINE, 2, &m));
    EXPECT(npq_moments_dim(m) == 4);
    EXPECT_OK(npq_moments_tau_hat(m, &tau));
    EXPECT(fabs(tau - 0.02) < 0.05);
    EXPECT_OK(npq_moments_mde(m, coeffs, 4, &len));
    EXPECT(len == 4);
    EXPECT(fabs(coeffs[0] - 1.0) < 0.1);
    EXPECT(npq_moments_quasi_loglik(m, b, 3, &ll) == NPQ_ERR_DIMENSION);
    EXPECT_OK(npq_moments_quasi_loglik(m, coeffs, 4, &ll));
    EXPECT(fabs(ll) < 1e-6);
    npq_moments_free(m);

    EXPECT_OK(npq_sample_from_arrays(&y, &x, &w, 1, &one));
    EXPECT_OK(npq_moments_compute(one, NPQ_BASIS_COSINE, 0, &m));
    EXPECT_OK(npq_moments_quasi_loglik(m, b, 1, &ll));
    EXPECT(fabs(ll + 2.0) < 1e-12); /* -(1/2) * 1 * 2^2 */
    npq_moments_free(m);
    npq_sample_free(one);

    one = NULL;
    EXPECT(npq_sample_from_arrays(&y, &bad_x, &w, 1, &one) == NPQ_ERR_DATA);
    EXPECT(strstr(npq_last_error(), "1") != NULL);
    EXPECT(npq_moments_compute(s, NPQ_BASIS_HAAR, -1, &m) == NPQ_ERR_DIMENSION);

    npq_sample_free(s);
    npq_design_free(d);
}

static void test_csv(const char* dir) {
    npq_design* d = NULL;
    npq_sample* s = NULL;
    npq_sample* back = NULL;
    char path[1024];
    double* y1;
    double* y2;
    size_t n, i;
    FILE* f;

    EXPECT_OK(npq_design_from_json(kDesign, &d));
    EXPECT_OK(npq_sample_simulate(d, 1000, 3, &s));
    snprintf(path, sizeof path, "%s/capi_sample.csv", dir);
    EXPECT_OK(npq_sample_save_csv(s, path));
    EXPECT_OK(npq_sample_load_csv(path, &back));
    n = npq_sample_size(back);
    EXPECT(n == 1000);
    y1 = malloc(n * sizeof(double));
    y2 = malloc(n * sizeof(double));
    EXPECT_OK(npq_sample_columns(s, y1, NULL, NULL));
    EXPECT_OK(npq_sample_columns(back, y2, NULL, NULL));
    for (i = 0; i < n; ++i) EXPECT(memcmp(&y1[i], &y2[i], sizeof(double)) == 0);
    free(y1);
    free(y2);
    npq_sample_free(back);

    snprintf(path, sizeof path, "%s/capi_bad.csv", dir);
    f = fopen(path, "w");
    fputs("y,x,w\n1,0.5\n", f);
    fclose(f);
    back = NULL;
    EXPECT(npq_sample_load_csv(path, &back) == NPQ_ERR_CSV_MALFORMED_ROW);
    EXPECT(back == NULL);
    snprintf(path, sizeof path, "%s/does_not_exist.csv", dir);
    EXPECT(npq_sample_load_csv(path, &back) == NPQ_ERR_IO);

    npq_sample_free(s);
    npq_design_free(d);
}

static void test_fit(void) {
    npq_design* d = NULL;
    npq_sample* s = NULL;
    npq_fit* fit = NULL;
    npq_fit* again = NULL;
    double qb[8], mde[8], sd[8];
    size_t len = 0, json_len = 0, json_len2 = 0;
    char* json;
    char* json2;
    char config[512];

    EXPECT_OK(npq_design_from_json(kDesign, &d));
    EXPECT_OK(npq_sample_simulate(d, 2000, 11, &s));

    snprintf(config, sizeof config, "{\"design\":%s,\"prior\":{\"family\":\"gaussian\",\"sigma\":1000000}}", kDesign);
    EXPECT_OK(npq_fit_run(config, s, 1, &fit));
    EXPECT(npq_fit_level(fit) == 2); /* 2000^(1/7) is about 2^1.57 */
    EXPECT(npq_fit_tau_hat(fit) > 0.0);
    EXPECT_OK(npq_fit_qb(fit, qb, 8, &len));
    EXPECT(len == 4);
    EXPECT_OK(npq_fit_mde(fit, mde, 8, &len));
    EXPECT(fabs(qb[0] - mde[0]) < 1e-3 * fabs(mde[0]));
    EXPECT(fabs(qb[1] - mde[1]) < 1e-3 * fabs(mde[1]) + 1e-9);
    EXPECT(fabs(qb[3] - mde[3]) < 1e-3 * fabs(mde[3]) + 1e-9);
    EXPECT_OK(npq_fit_posterior_sd(fit, sd, 8, &len));
    EXPECT(sd[1] > sd[0]);

    EXPECT(npq_fit_report_json(fit, NULL, 0, &json_len) == NPQ_ERR_BUFFER_TOO_SMALL);
    json = malloc(json_len + 1);
    EXPECT_OK(npq_fit_report_json(fit, json, json_len + 1, &json_len));
    EXPECT(strlen(json) == json_len);
    EXPECT(strstr(json, "\"method\"") != NULL);

    /* Same inputs, same report. */
    EXPECT_OK(npq_fit_run(config, s, 1, &again));
    EXPECT(npq_fit_report_json(again, NULL, 0, &json_len2) == NPQ_ERR_BUFFER_TOO_SMALL);
    json2 = malloc(json_len2 + 1);
    EXPECT_OK(npq_fit_report_json(again, json2, json_len2 + 1, &json_len2));
    EXPECT(json_len == json_len2 && strcmp(json, json2) == 0);
    free(json);
    free(json2);
    npq_fit_free(again);
    npq_fit_free(fit);

    /* No design: explicit J is required. */
    fit = NULL;
    EXPECT(npq_fit_run("{\"prior\":{\"family\":\"gaussian\",\"sigma\":10}}", s, 1, &fit) == NPQ_ERR_CONFIGURATION);
    EXPECT_OK(npq_fit_run("{\"J\":2,\"prior\":{\"family\":\"gaussian\",\"sigma\":10}}", s, 1, &fit));
    EXPECT(npq_fit_level(fit) == 2);
    npq_fit_free(fit);

    EXPECT(npq_fit_run("{\"J\":2,\"prior\":{\"family\":\"uniform\",\"A\":1},\"sampler\":{\"init\":[5,0,0,0]}}", s, 1,
                       &fit) == NPQ_ERR_INITIALIZATION);
    EXPECT(npq_fit_run("{broken", s, 1, &fit) == NPQ_ERR_CONFIGURATION);

    npq_sample_free(s);
    npq_design_free(d);
}

static void test_commands(const char* dir) {
    char cfg[1024], out[1024];
    FILE* f;
    uint64_t seed = 17;

    snprintf(cfg, sizeof cfg, "%s/capi_config.json", dir);
    f = fopen(cfg, "w");
    fprintf(f, "{\"design\":%s,\"n\":300}", kDesign);
    fclose(f);
    snprintf(out, sizeof out, "%s/capi_out", dir);
    EXPECT_OK(npq_run_command(NPQ_CMD_SIMULATE, cfg, &seed, out, NULL));
    EXPECT(strstr(npq_last_summary(), "n=300") != NULL);
    EXPECT_OK(npq_run_command(NPQ_CMD_FIT, cfg, NULL, out, NULL));
    EXPECT(strncmp(npq_last_summary(), "fit:", 4) == 0);
    EXPECT(npq_run_command(NPQ_CMD_FIT, "/nonexistent/config.json", NULL, out, NULL) == NPQ_ERR_IO);
    EXPECT(npq_run_command((npq_command)42, cfg, NULL, out, NULL) == NPQ_ERR_CONFIGURATION);
}

int main(int argc, char** argv) {
    const char* dir = argc > 1 ? argv[1] : ".";
    test_status_helpers();
    test_design();
    test_sample_and_moments();
    test_csv(dir);
    test_fit();
    test_commands(dir);
    if (failures) {
        fprintf(stderr, "%d check(s) failed\n", failures);
        return 1;
    }
    printf("capi: all checks passed\n");
    return 0;
}
