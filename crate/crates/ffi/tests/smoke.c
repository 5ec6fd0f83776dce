#include <stdio.h>
#include <string.h>
#include "ans_rdh.h"

int main(void) {
    uint8_t host[3000];
    for (int i = 0; i < 3000; i++) host[i] = (uint8_t)(128 + (i * 37 % 17) - 8);
    const char *msg = "from C";

    ArdhOptions opts = ardh_options_default();
    opts.alpha = 1.01;
    ArdhEmbedding *e = NULL;
    ArdhStatus st = ardh_embed_raw(host, sizeof host, (const uint8_t *)msg, strlen(msg), ARDH_MODE_STATIC, &opts, &e);
    if (st != ARDH_STATUS_OK) {
        fprintf(stderr, "embed: %s: %s\n", ardh_status_name(st), ardh_last_error_message());
        return 1;
    }
    const uint8_t *stego, *side;
    size_t stego_len, side_len;
    ardh_embedding_stego(e, &stego, &stego_len);
    ardh_embedding_sidecar(e, &side, &side_len);

    ArdhRecovered *r = NULL;
    st = ardh_extract(stego, stego_len, side, side_len, &r);
    if (st != ARDH_STATUS_OK) {
        fprintf(stderr, "extract: %s\n", ardh_last_error_message());
        return 1;
    }
    const uint8_t *back;
    size_t back_len;
    ardh_recovered_host(r, &back, &back_len);
    int ok = back_len == sizeof host && memcmp(back, host, sizeof host) == 0;

    st = ardh_extract(stego, stego_len, side, 3, &r);
    ok = ok && st == ARDH_STATUS_FORMAT;

    printf("%s %lld\n", ok ? "ok" : "mismatch", (long long)ardh_embedding_net_bits(e));
    ardh_embedding_free(e);
    return ok ? 0 : 1;
}
