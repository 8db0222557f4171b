#pragma once

#include "qcorr/channels.hpp"
#include "qcorr/collective.hpp"
#include "qcorr/discord.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/qstate.hpp"
#include "qcorr/scenario.hpp"
#include "qcorr/version.hpp"
#include "qcorr/witness.hpp"
