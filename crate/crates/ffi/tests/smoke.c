#include <stdio.h>
#include <string.h>

#include "brtpf.h"

int main(void) {
    BrtpfDataset *ds = NULL;
    if (brtpf_dataset_parse("<urn:a> <urn:p> <urn:b> .\n<urn:b> <urn:p> <urn:c> .\n", &ds) != BRTPF_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", brtpf_last_error());
        return 1;
    }
    BrtpfServer *server = NULL;
    if (brtpf_server_start(ds, 100, 30, 0, &server) != BRTPF_STATUS_OK) {
        fprintf(stderr, "start: %s\n", brtpf_last_error());
        return 1;
    }
    brtpf_dataset_free(ds);
    char *url = brtpf_server_url(server);
    BrtpfResult *result = NULL;
    BrtpfStatus st = brtpf_query_execute(url, "?x <urn:p> ?y .\n?y <urn:p> ?z .\n", BRTPF_ENGINE_BRTPF, 30, 0, &result);
    brtpf_string_free(url);
    if (st != BRTPF_STATUS_OK) {
        fprintf(stderr, "query: %s\n", brtpf_last_error());
        return 1;
    }
    BrtpfMetrics m;
    brtpf_result_metrics(result, &m);
    for (size_t i = 0; i < brtpf_result_len(result); i++) {
        char *s = brtpf_result_solution(result, i);
        printf("%s\n", s);
        brtpf_string_free(s);
    }
    printf("results=%llu\n", (unsigned long long)m.result_count);
    brtpf_result_free(result);
    if (brtpf_dataset_parse(NULL, &ds) != BRTPF_STATUS_NULL_ARGUMENT) {
        return 1;
    }
    return brtpf_server_stop(server) == BRTPF_STATUS_OK ? 0 : 1;
}
