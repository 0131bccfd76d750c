#include <math.h>
#include <stdio.h>

#include "qudit_transfer.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    QtStatus s_ = (call);                                                      \
    if (s_ != QT_STATUS_OK) {                                                  \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, qt_last_error_message()); \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  QtChain *chain = NULL;
  if (qt_chain_new(1, 3, 1.0, 0.0, QT_MODE_EXACT, &chain) != QT_STATUS_INVALID_ARGUMENT) {
    return 2;
  }
  CHECK(qt_chain_new(2, 3, 1.0, 0.0, QT_MODE_EXACT, &chain));

  double p = 0.0;
  CHECK(qt_chain_receiver_probability(chain, M_PI / 2.0, &p));
  if (fabs(p - 1.0) > 1e-12) {
    return 3;
  }

  double re[1] = {1.0}, im[1] = {0.0};
  const double payload_re[2] = {1.0, 0.0}, payload_im[2] = {0.0, 1.0};
  if (qt_chain_propagator(chain, 1.0, re, im, 1) != QT_STATUS_BUFFER_TOO_SMALL) {
    return 4;
  }

  QtProtocolResult *result = NULL;
  CHECK(qt_run_protocol(chain, payload_re, payload_im, 2, QT_STRATEGY_OPTIMIZED, 5, 7, "S", &result));
  size_t len = 0;
  QtRecord record;
  CHECK(qt_result_len(result, &len));
  CHECK(qt_result_record(result, 0, &record));
  if (len != 1 || record.outcome != QT_OUTCOME_SUCCESS || !record.forced) {
    return 5;
  }
  qt_result_free(result);
  qt_chain_free(chain);
  printf("ok %.12f\n", record.p);
  return 0;
}
