/* Decode one noisy Hamming(7,4) block with plain BP and run a short error-rate estimate. */
#include <stdio.h>

#include "wbp_active.h"

int main(void) {
    WbpCode *code = NULL;
    WbpWeights *weights = NULL;
    if (wbp_code_fixture("hamming_7_4", &code) != WBP_STATUS_OK ||
        wbp_weights_unit(code, 5, &weights) != WBP_STATUS_OK) {
        fprintf(stderr, "setup failed: %s\n", wbp_last_error());
        return 1;
    }

    double llr[7] = {4.0, 4.0, -1.0, 4.0, 4.0, 4.0, 4.0};
    uint8_t bits[7];
    if (wbp_decode(code, weights, llr, 7, 10.0, NULL, bits) != WBP_STATUS_OK) {
        fprintf(stderr, "decode failed: %s\n", wbp_last_error());
        return 1;
    }
    for (int i = 0; i < 7; i++) printf("%d", bits[i]);
    printf("\n");

    WbpErrorStats stats;
    if (wbp_eval(code, weights, 10.0, 3.0, 20, 100000, 1, &stats) != WBP_STATUS_OK) {
        fprintf(stderr, "eval failed: %s\n", wbp_last_error());
        return 1;
    }
    printf("fer=%.3e blocks=%llu\n", stats.fer, (unsigned long long)stats.blocks);

    wbp_weights_free(weights);
    wbp_code_free(code);
    return 0;
}
