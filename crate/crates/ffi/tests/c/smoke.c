#include <stdio.h>
#include "pbfs.h"

int main(void) {
    uint32_t src[4] = {0, 1, 2, 3};
    uint32_t dst[4] = {1, 2, 3, 4};
    PbfsGraph *g = NULL;
    if (pbfs_graph_from_edges(src, dst, 4, 5, true, &g) != PBFS_STATUS_OK) return 10;

    PbfsConfig cfg = pbfs_config_default(PBFS_VARIANT_HYBRID);
    cfg.worker_count = 2;
    uint32_t dist[5];
    PbfsTrace *trace = NULL;
    if (pbfs_run(g, 0, &cfg, dist, 5, &trace) != PBFS_STATUS_OK) return 11;
    for (uint32_t v = 0; v < 5; v++)
        if (dist[v] != v) return 12;
    if (pbfs_trace_level_count(trace) != 5) return 13;

    if (pbfs_run(g, 9, &cfg, dist, 5, NULL) != PBFS_STATUS_INVALID_ARGUMENT) return 14;
    printf("%s\n", pbfs_last_error());

    pbfs_trace_free(trace);
    pbfs_graph_free(g);
    return 0;
}
