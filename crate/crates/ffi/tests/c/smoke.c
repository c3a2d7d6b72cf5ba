#include <math.h>
#include <stdio.h>
#include "spinescan.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        SsStatus s_ = (call);                                              \
        if (s_ != SS_STATUS_OK) {                                          \
            const char *m_ = ss_last_error();                              \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, m_ ? m_ : ""); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    SsVolume *vol = NULL;
    SsConfig *cfg = NULL;
    SsReport *rep = NULL;
    size_t dims[3];
    int label;
    double prob, lo, hi;
    size_t n;

    CHECK(ss_volume_phantom(3, true, &vol));
    CHECK(ss_volume_dims(vol, dims));
    CHECK(ss_config_default(&cfg));
    CHECK(ss_process_scan(cfg, vol, "c-smoke", &rep));
    CHECK(ss_report_label(rep, &label, &prob));
    CHECK(ss_report_detection_count(rep, &n));
    CHECK(ss_wilson_ci(95, 100, 1.96, &lo, &hi));
    if (ss_wilson_ci(1, 0, 1.96, &lo, &hi) != SS_STATUS_VALIDATION || ss_last_error() == NULL) {
        return 2;
    }
    printf("dims %zu %zu %zu label %d detections %zu\n", dims[0], dims[1], dims[2], label, n);
    ss_report_free(rep);
    ss_config_free(cfg);
    ss_volume_free(vol);
    return label == SS_LABEL_ABNORMAL && n > 0 ? 0 : 3;
}
