# Hölder extension library: spaces, targets, extension constructions, certificates
