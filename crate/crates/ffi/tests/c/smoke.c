#include <math.h>
#include <stdio.h>
#include <string.h>

#include "fsdgpm.h"

int main(void) {
    double r[4] = {0.9, NAN, 0.7, 0.8};
    double acc = 0.0, bwt = 0.0;
    if (fsdgpm_acc(r, 2, &acc) != FSDGPM_STATUS_OK || fabs(acc - 0.75) > 1e-12) return 1;
    if (fsdgpm_bwt(r, 2, &bwt) != FSDGPM_STATUS_OK || fabs(bwt + 0.2) > 1e-12) return 2;

    size_t dims[3] = {3, 4, 2};
    FsdgpmTrainer *trainer = NULL;
    if (fsdgpm_trainer_new("fsdgpm", dims, 3, 0, 7, &trainer) != FSDGPM_STATUS_OK) return 3;
    double x[6] = {1.0, 0.0, 0.5, -1.0, 0.2, 0.0};
    size_t y[2] = {0, 1};
    double loss = 0.0;
    fsdgpm_trainer_begin_task(trainer, 0);
    if (fsdgpm_trainer_train_batch(trainer, x, y, 2, 3, &loss) != FSDGPM_STATUS_OK || !(loss > 0.0)) return 4;
    if (fsdgpm_trainer_train_batch(trainer, x, y, 2, 2, &loss) != FSDGPM_STATUS_INVALID_INPUT) return 5;
    if (fsdgpm_last_error() == NULL || strlen(fsdgpm_last_error()) == 0) return 6;

    FsdgpmModel *model = NULL;
    size_t labels[2];
    if (fsdgpm_trainer_snapshot(trainer, &model) != FSDGPM_STATUS_OK) return 7;
    if (fsdgpm_model_predict(model, x, 2, 3, 0, labels) != FSDGPM_STATUS_OK || labels[0] > 1) return 8;
    fsdgpm_model_free(model);
    fsdgpm_trainer_free(trainer);
    printf("ok %s\n", fsdgpm_version());
    return 0;
}
