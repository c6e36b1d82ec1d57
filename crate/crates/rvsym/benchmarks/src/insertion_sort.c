/* Insertion sort over N symbolic bytes: N! paths, one per relative
 * ordering. The `j >= 0` guard is concrete; only `data[j] > key`
 * contributes tracked branches. Build with -O0 -DN=<size>. */
#include "hypercall.h"

#ifndef N
#define N 4
#endif

static unsigned char data[N];

void _start(void) {
    hc_make_symbolic(data, N);
    for (int i = 1; i < N; i++) {
        unsigned char key = data[i];
        int j = i - 1;
        while (j >= 0 && data[j] > key) {
            data[j + 1] = data[j];
            j--;
        }
        data[j + 1] = key;
    }
    unsigned sum = 0;
    for (int i = 0; i < N; i++) {
        sum += data[i];
    }
    hc_exit(sum & 0xFF);
}
