// Copyright 2026 The attestkit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#pragma once

#include "attestkit/aes.hpp"
#include "attestkit/blob.hpp"
#include "attestkit/bytes.hpp"
#include "attestkit/certificate.hpp"
#include "attestkit/config.hpp"
#include "attestkit/demo.hpp"
#include "attestkit/errors.hpp"
#include "attestkit/measurement.hpp"
#include "attestkit/net.hpp"
#include "attestkit/pca.hpp"
#include "attestkit/ra.hpp"
#include "attestkit/rsa.hpp"
#include "attestkit/sha1.hpp"
#include "attestkit/stores.hpp"
#include "attestkit/tpm.hpp"
#include "attestkit/uuid.hpp"
